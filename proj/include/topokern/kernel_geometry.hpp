#pragma once

#include <iosfwd>
#include <string>

#include "topokern/mat3.hpp"
#include "topokern/so3.hpp"

namespace topokern::geometry {

/// A 3x3 convolution kernel viewed as three column vectors [v1 v2 v3].
/// Row-major flat storage: column j, row i lives at flat index 3i + j.
struct Kernel3x3 {
    Mat3 mat;

    Vec3 v1() const { return mat.col(0); }
    Vec3 v2() const { return mat.col(1); }
    Vec3 v3() const { return mat.col(2); }

    double& at(std::size_t row, std::size_t col) { return mat(row, col); }
    double at(std::size_t row, std::size_t col) const { return mat(row, col); }
    const std::array<double, 9>& flat() const { return mat.m; }
    std::array<double, 9>& flat() { return mat.m; }

    Kernel3x3 operator-() const { return {-mat}; }
    bool allFinite() const { return mat.allFinite(); }
};

/// Invariant coordinates of an SO(3) orbit:
///   x = |v1|^2, y = |v3|^2, z = v1.v3.
/// On the kernel space they satisfy x + y + z = 1/2 and z^2 <= xy,
/// so (x, y) ranges over a closed disk.
struct QuotientPoint {
    double x = 0.0, y = 0.0, z = 0.0;
};

/// Orbit type of a kernel, by the configuration of v1 and v3.
enum class Stratum {
    Generic,        // free orbit, fiber SO(3)
    Boundary,       // v1, v3 collinear (z^2 = xy), fiber S^2
    EqualMagnitude, // |v1| = |v3|, fiber L(4,1)
    Antipodal,      // v1 + v3 = 0, fiber RP^2
};

const char* stratumName(Stratum s);
const char* stratumFiber(Stratum s);

/// Default absolute tolerance for the geometric predicates (binary64).
inline constexpr double kGeomTol = 1e-9;

/// sqrt(|v1|^2 + |v2|^2 + |v3|^2); coincides with the Frobenius norm.
double kernelNorm(const Kernel3x3& a);

/// sqrt(|v1 - v2|^2 + |v2 - v3|^2); zero exactly for three equal columns.
double contrast(const Kernel3x3& a);

/// Membership in M: unit norm and zero column sum, both within tol.
bool isInM(const Kernel3x3& a, double tol);

/// Left action Q * A. Rejects Q failing isRotation at 1e-9.
Kernel3x3 applyRotation(const so3::Rotation3& q, const Kernel3x3& a);

/// Centers the columns (v_i -> v_i - mean) and rescales to unit norm,
/// landing in M. Throws DegenerateKernel when the columns are identical
/// (the centered matrix vanishes and no projection exists).
Kernel3x3 projectToM(const Kernel3x3& a);

/// (x, y, z) of the orbit through A. Requires isInM(a, 1e-6).
QuotientPoint quotientCoords(const Kernel3x3& a);

/// Disk membership test in base coordinates:
///   x >= 0, y >= 0, 9(x + y - 2/3)^2 + 3(x - y)^2 <= 1,
/// each within a 1e-12 band.
bool inQuotientDisk(double x, double y);

/// Orbit-type classification; precedence Antipodal > Boundary >
/// EqualMagnitude > Generic. Requires isInM(a, 1e-6).
Stratum classifyStratum(const Kernel3x3& a, double tol);

/// Selects one kernel [u, -u - w, w] over the base point (x, y):
///   u = sqrt(x/3) (1,1,1)^T,
///   w = sqrt(y/3) cos(phi) (1,1,1)^T + sqrt(y/6) sin(phi) (1,-2,1)^T,
///   cos(phi) = (1/2 - x - y) / sqrt(xy), clamped to [-1, 1].
/// For x = 0 or y = 0 the phase is immaterial (the scaled term vanishes).
Kernel3x3 liftFromBase(double x, double y);

/// Text format: 3 lines x 3 whitespace-separated reals, row-major,
/// 17 significant digits on output.
Kernel3x3 parseKernelText(std::istream& in);
Kernel3x3 readKernelFile(const std::string& path);
std::string formatKernelText(const Kernel3x3& a);
void writeKernelFile(const std::string& path, const Kernel3x3& a);

} // namespace topokern::geometry
