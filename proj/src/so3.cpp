#include "topokern/so3.hpp"

namespace topokern::so3 {

Mat3 hatMap(const LieVector& v) {
    Mat3 hat;
    hat(0, 1) = -v.thetaZ;
    hat(0, 2) = v.thetaY;
    hat(1, 0) = v.thetaZ;
    hat(1, 2) = -v.thetaX;
    hat(2, 0) = -v.thetaY;
    hat(2, 1) = v.thetaX;
    return hat;
}

Rotation3 expSO3(const LieVector& v) {
    const double angle = v.norm();
    const Mat3 hat = hatMap(v);
    const Mat3 hatSq = hat * hat;

    double sinc, versinc; // sin(a)/a and (1-cos(a))/a^2
    if (angle < 1e-8) {
        const double a2 = angle * angle;
        sinc = 1.0 - a2 / 6.0;
        versinc = 0.5 - a2 / 24.0;
    } else {
        sinc = std::sin(angle) / angle;
        versinc = (1.0 - std::cos(angle)) / (angle * angle);
    }
    return Rotation3{Mat3::identity() + sinc * hat + versinc * hatSq};
}

bool isRotation(const Mat3& r, double tol) {
    const Mat3 gram = r.transposed() * r;
    return gram.maxAbsDiff(Mat3::identity()) <= tol && std::abs(r.det() - 1.0) <= tol;
}

Rotation3 sampleRotation(double sigma, GaussianSampler& gaussian) {
    LieVector v;
    v.thetaX = sigma * gaussian.next();
    v.thetaY = sigma * gaussian.next();
    v.thetaZ = sigma * gaussian.next();
    return expSO3(v);
}

} // namespace topokern::so3
