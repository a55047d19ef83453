#include "topokern/kernel_geometry.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

#include "topokern/error.hpp"

namespace topokern::geometry {

const char* stratumName(Stratum s) {
    switch (s) {
        case Stratum::Generic: return "Generic";
        case Stratum::Boundary: return "Boundary";
        case Stratum::EqualMagnitude: return "EqualMagnitude";
        case Stratum::Antipodal: return "Antipodal";
    }
    return "?";
}

const char* stratumFiber(Stratum s) {
    switch (s) {
        case Stratum::Generic: return "SO(3)";
        case Stratum::Boundary: return "S^2";
        case Stratum::EqualMagnitude: return "L(4,1)";
        case Stratum::Antipodal: return "RP^2";
    }
    return "?";
}

double kernelNorm(const Kernel3x3& a) {
    return a.mat.frobeniusNorm();
}

double contrast(const Kernel3x3& a) {
    const Vec3 d12 = a.v1() - a.v2();
    const Vec3 d23 = a.v2() - a.v3();
    return std::sqrt(d12.squaredNorm() + d23.squaredNorm());
}

bool isInM(const Kernel3x3& a, double tol) {
    const Vec3 colSum = a.v1() + a.v2() + a.v3();
    return std::abs(kernelNorm(a) - 1.0) <= tol && colSum.norm() <= tol;
}

Kernel3x3 applyRotation(const so3::Rotation3& q, const Kernel3x3& a) {
    if (!so3::isRotation(q.matrix, 1e-9))
        fail(ErrorCode::BadConfig, "applyRotation: matrix is not a rotation");
    return {q.matrix * a.mat};
}

Kernel3x3 projectToM(const Kernel3x3& a) {
    // Column centering kills the column sum; any rotation that the full
    // procedure might apply first is pure gauge on the orbit and is undone
    // here so the projection is translation invariant.
    const Vec3 mean = (a.v1() + a.v2() + a.v3()) * (1.0 / 3.0);
    Kernel3x3 centered;
    for (std::size_t j = 0; j < 3; ++j)
        centered.mat.setCol(j, a.mat.col(j) - mean);

    const double norm = kernelNorm(centered);
    const double scale = std::max(1.0, kernelNorm(a));
    if (norm <= 1e-12 * scale)
        fail(ErrorCode::DegenerateKernel,
             "projectToM: columns are identical (zero contrast)");
    return {centered.mat * (1.0 / norm)};
}

QuotientPoint quotientCoords(const Kernel3x3& a) {
    if (!isInM(a, 1e-6))
        fail(ErrorCode::NotInM, "quotientCoords requires a kernel in M");
    return {a.v1().squaredNorm(), a.v3().squaredNorm(), a.v1().dot(a.v3())};
}

bool inQuotientDisk(double x, double y) {
    if (x < -1e-12 || y < -1e-12) return false;
    const double ellipse = 9.0 * (x + y - 2.0 / 3.0) * (x + y - 2.0 / 3.0) +
                           3.0 * (x - y) * (x - y);
    return ellipse <= 1.0 + 1e-12;
}

Stratum classifyStratum(const Kernel3x3& a, double tol) {
    if (!isInM(a, 1e-6))
        fail(ErrorCode::NotInM, "classifyStratum requires a kernel in M");
    const Vec3 v1 = a.v1();
    const Vec3 v3 = a.v3();
    if ((v1 + v3).norm() <= tol) return Stratum::Antipodal;
    const double x = v1.squaredNorm();
    const double y = v3.squaredNorm();
    const double z = v1.dot(v3);
    if (std::abs(z * z - x * y) <= tol) return Stratum::Boundary;
    if (std::abs(x - y) <= tol) return Stratum::EqualMagnitude;
    return Stratum::Generic;
}

Kernel3x3 liftFromBase(double x, double y) {
    if (!inQuotientDisk(x, y))
        fail(ErrorCode::OutsideDisk, "liftFromBase: point outside the base disk");
    x = std::max(x, 0.0);
    y = std::max(y, 0.0);

    double cosPhi = 0.0;
    const double xy = x * y;
    if (xy > 0.0)
        cosPhi = std::clamp((0.5 - x - y) / std::sqrt(xy), -1.0, 1.0);
    const double sinPhi = std::sqrt(std::max(0.0, 1.0 - cosPhi * cosPhi));

    const Vec3 ones{1.0, 1.0, 1.0};
    const Vec3 curve{1.0, -2.0, 1.0};
    const Vec3 u = std::sqrt(x / 3.0) * ones;
    const Vec3 w = std::sqrt(y / 3.0) * cosPhi * ones + std::sqrt(y / 6.0) * sinPhi * curve;

    Kernel3x3 k;
    k.mat.setCol(0, u);
    k.mat.setCol(1, -(u + w));
    k.mat.setCol(2, w);
    return k;
}

Kernel3x3 parseKernelText(std::istream& in) {
    Kernel3x3 k;
    for (double& entry : k.flat()) {
        if (!(in >> entry))
            fail(ErrorCode::ParseError, "kernel text: expected 9 real values");
    }
    if (!k.allFinite())
        fail(ErrorCode::ParseError, "kernel text: non-finite entry");
    return k;
}

Kernel3x3 readKernelFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open kernel file: " + path);
    return parseKernelText(in);
}

std::string formatKernelText(const Kernel3x3& a) {
    std::string out;
    char buf[64];
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", a.at(i, j));
            out += buf;
            out += (j == 2) ? '\n' : ' ';
        }
    }
    return out;
}

void writeKernelFile(const std::string& path, const Kernel3x3& a) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::IoError, "cannot write kernel file: " + path);
    out << formatKernelText(a);
}

} // namespace topokern::geometry
