#pragma once

#include "topokern/mat3.hpp"
#include "topokern/rng.hpp"

namespace topokern::so3 {

/// Coordinates along the so(3) basis generators Lx, Ly, Lz (radians).
struct LieVector {
    double thetaX = 0.0, thetaY = 0.0, thetaZ = 0.0;

    double norm() const {
        return std::sqrt(thetaX * thetaX + thetaY * thetaY + thetaZ * thetaZ);
    }
    LieVector operator-() const { return {-thetaX, -thetaY, -thetaZ}; }
};

/// Special orthogonal 3x3 matrix. Construct via expSO3 (validated there);
/// the raw constructor is for deserialization and tests.
struct Rotation3 {
    Mat3 matrix;
};

/// theta_x*Lx + theta_y*Ly + theta_z*Lz:
///
///   [    0  -t_z   t_y ]
///   [  t_z     0  -t_x ]
///   [ -t_y   t_x     0 ]
Mat3 hatMap(const LieVector& v);

/// Rodrigues closed form
///   exp(theta) = I + (sin|t|/|t|) hat + ((1-cos|t|)/|t|^2) hat^2.
/// Below |t| = 1e-8 the coefficient ratios switch to their Taylor limits
/// 1 - t^2/6 and 1/2 - t^2/24 to avoid 0/0.
Rotation3 expSO3(const LieVector& v);

/// max|R^T R - I| <= tol and |det R - 1| <= tol.
bool isRotation(const Mat3& r, double tol);

/// Draws theta_x, theta_y, theta_z ~ N(0, sigma^2) from the supplied sampler
/// and exponentiates. The sampler is consumed; callers own one per stream.
Rotation3 sampleRotation(double sigma, GaussianSampler& gaussian);

} // namespace topokern::so3
