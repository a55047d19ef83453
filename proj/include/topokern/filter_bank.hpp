#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "topokern/kernel_geometry.hpp"

namespace topokern::banks {

using geometry::Kernel3x3;

enum class BankKind { OF, OF_NONORTH, KF, CF, RANDOM };

const char* bankKindName(BankKind kind);
BankKind bankKindFromName(const std::string& name);

/// Ordered kernel collection plus the parameters that regenerate it.
/// alpha scales OF/OF_NONORTH/RANDOM kernels; KF/CF kernels are always
/// mean-centered to unit norm and ignore alpha and sigma.
struct FilterBank {
    BankKind kind = BankKind::OF;
    double alpha = 1.0;
    double sigma = 0.5;
    std::uint64_t seed = 0;
    std::vector<Kernel3x3> kernels;
};

/// Univariate quadratic c0 + c1 t + c2 t^2 restricted to zero mean and unit
/// energy on [-1, 1], swept along the direction (lambda, mu) on the unit
/// circle: f(x, y) = q(lambda x + mu y).
struct QuadraticProfile {
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
    double lambda = 1.0, mu = 0.0;

    /// integral of q over [-1, 1] = 2 c0 + (2/3) c2
    double meanIntegral() const { return 2.0 * c0 + (2.0 / 3.0) * c2; }
    /// integral of q^2 over [-1, 1]
    double energyIntegral() const {
        return 2.0 * c0 * c0 + (2.0 / 3.0) * c1 * c1 + (2.0 / 5.0) * c2 * c2 +
               (4.0 / 3.0) * c0 * c2;
    }
    bool valid(double tol = 1e-9) const {
        return std::abs(meanIntegral()) <= tol &&
               std::abs(energyIntegral() - 1.0) <= tol &&
               std::abs(lambda * lambda + mu * mu - 1.0) <= tol;
    }

    /// Unit-energy mix cos(psi) * (linear profile) + sin(psi) * (quadratic
    /// profile); the two pure profiles are L^2-orthogonal on [-1, 1].
    static QuadraticProfile mixed(double psi, double lambda, double mu);
};

/// The two stripe detectors of unit norm and zero column sum:
///   A1 = [[1,0,-1],[1,0,-1],[1,0,-1]] / sqrt(6)
///   A2 = [[1,-2,1],[1,-2,1],[1,-2,1]] / sqrt(18)
std::pair<Kernel3x3, Kernel3x3> baseMatricesOF();

/// The zero-contrast-space variant [v1, 0, +-v1]:
///   [[1,0,-1],...] / sqrt(6)  and  [[1,0,1],...] / sqrt(6).
/// The second has nonzero column sum (orthogonality relaxed).
std::pair<Kernel3x3, Kernel3x3> baseMatricesNonOrthogonal();

/// Closure under negation: {B1..Bn} -> {B1..Bn, -B1..-Bn}.
std::vector<Kernel3x3> augment(const std::vector<Kernel3x3>& bases);

/// Samples f at the grid {-1,0,1}^2 (entry (i,j) = f(j-1, i-1)) and
/// mean-centers / unit-normalizes the nine values.
Kernel3x3 kleinFilter(const QuadraticProfile& p);

/// kleinFilter with the pure linear profile c1 = sqrt(3/2) along
/// (cos angle, sin angle).
Kernel3x3 circleFilter(double angle);

/// Subtracts the mean of the 9 entries and rescales to unit Frobenius norm.
/// Throws DegenerateKernel on a constant patch.
Kernel3x3 normalizeKernel(const Kernel3x3& k);

/// Deterministic bank generation; identical arguments give bitwise-identical
/// banks. OF kinds: kernel k = alpha * R_k * M[k mod |M|] with a fresh
/// rotation draw per kernel. KF: Fibonacci lattice over (direction, profile
/// mix). CF: angles 2 pi k / count. RANDOM: N(0,1) entries * alpha*sqrt(2/9).
FilterBank generateBank(BankKind kind, int count, double alpha, double sigma,
                        std::uint64_t seed);

/// JSON persistence; values written with 17 significant digits so binary64
/// round-trips exactly. load validates kind-specific invariants.
void saveBank(const FilterBank& bank, const std::string& path);
std::string bankToJson(const FilterBank& bank);
FilterBank loadBank(const std::string& path);
FilterBank bankFromJson(const std::string& text);

} // namespace topokern::banks
