#include "topokern/filter_bank.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "topokern/error.hpp"
#include "topokern/rng.hpp"

namespace topokern::banks {

const char* bankKindName(BankKind kind) {
    switch (kind) {
        case BankKind::OF: return "OF";
        case BankKind::OF_NONORTH: return "OF_NONORTH";
        case BankKind::KF: return "KF";
        case BankKind::CF: return "CF";
        case BankKind::RANDOM: return "RANDOM";
    }
    return "?";
}

BankKind bankKindFromName(const std::string& name) {
    std::string lower;
    for (char c : name) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == "of") return BankKind::OF;
    if (lower == "of_nonorth" || lower == "of-nonorth") return BankKind::OF_NONORTH;
    if (lower == "kf") return BankKind::KF;
    if (lower == "cf") return BankKind::CF;
    if (lower == "random") return BankKind::RANDOM;
    fail(ErrorCode::BadConfig, "unknown bank kind: " + name);
}

QuadraticProfile QuadraticProfile::mixed(double psi, double lambda, double mu) {
    // Pure linear: sqrt(3/2) t.  Pure quadratic (zero mean): sqrt(45/8) (t^2 - 1/3).
    const double linear = std::sqrt(1.5);
    const double quad = std::sqrt(45.0 / 8.0);
    QuadraticProfile p;
    p.c1 = std::cos(psi) * linear;
    p.c2 = std::sin(psi) * quad;
    p.c0 = -p.c2 / 3.0;
    p.lambda = lambda;
    p.mu = mu;
    return p;
}

std::pair<Kernel3x3, Kernel3x3> baseMatricesOF() {
    const double s6 = 1.0 / std::sqrt(6.0);
    const double s18 = 1.0 / std::sqrt(18.0);
    Kernel3x3 a1, a2;
    for (std::size_t i = 0; i < 3; ++i) {
        a1.at(i, 0) = s6;
        a1.at(i, 1) = 0.0;
        a1.at(i, 2) = -s6;
        a2.at(i, 0) = s18;
        a2.at(i, 1) = -2.0 * s18;
        a2.at(i, 2) = s18;
    }
    return {a1, a2};
}

std::pair<Kernel3x3, Kernel3x3> baseMatricesNonOrthogonal() {
    const double s6 = 1.0 / std::sqrt(6.0);
    Kernel3x3 b1, b2;
    for (std::size_t i = 0; i < 3; ++i) {
        b1.at(i, 0) = s6;
        b1.at(i, 1) = 0.0;
        b1.at(i, 2) = -s6;
        b2.at(i, 0) = s6;
        b2.at(i, 1) = 0.0;
        b2.at(i, 2) = s6;
    }
    return {b1, b2};
}

std::vector<Kernel3x3> augment(const std::vector<Kernel3x3>& bases) {
    if (bases.empty()) fail(ErrorCode::BadConfig, "augment: empty base set");
    std::vector<Kernel3x3> out = bases;
    out.reserve(bases.size() * 2);
    for (const auto& b : bases) out.push_back(-b);
    return out;
}

Kernel3x3 normalizeKernel(const Kernel3x3& k) {
    double mean = 0.0;
    for (double v : k.flat()) mean += v;
    mean /= 9.0;

    Kernel3x3 centered = k;
    for (double& v : centered.flat()) v -= mean;

    const double norm = centered.mat.frobeniusNorm();
    double scale = 0.0;
    for (double v : k.flat()) scale = std::max(scale, std::abs(v));
    if (norm <= 1e-12 * std::max(1.0, scale))
        fail(ErrorCode::DegenerateKernel, "normalizeKernel: constant patch");
    for (double& v : centered.flat()) v /= norm;
    return centered;
}

Kernel3x3 kleinFilter(const QuadraticProfile& p) {
    if (!p.valid())
        fail(ErrorCode::BadConfig, "kleinFilter: profile violates mean/energy constraints");
    Kernel3x3 patch;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const double t = p.lambda * (j - 1) + p.mu * (i - 1);
            patch.at(i, j) = p.c0 + p.c1 * t + p.c2 * t * t;
        }
    }
    double lo = patch.flat()[0], hi = patch.flat()[0];
    for (double v : patch.flat()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi - lo <= 1e-12)
        fail(ErrorCode::DegenerateProfile, "kleinFilter: sampled patch is constant");
    return normalizeKernel(patch);
}

Kernel3x3 circleFilter(double angle) {
    QuadraticProfile p;
    p.c1 = std::sqrt(1.5);
    p.lambda = std::cos(angle);
    p.mu = std::sin(angle);
    return kleinFilter(p);
}

namespace {

Kernel3x3 scaled(const Kernel3x3& k, double s) {
    Kernel3x3 out = k;
    for (double& v : out.flat()) v *= s;
    return out;
}

std::vector<Kernel3x3> generateOrthogonalFamily(const std::vector<Kernel3x3>& bases,
                                                int count, double alpha, double sigma,
                                                std::uint64_t seed) {
    const auto family = augment(bases);
    GaussianSampler gaussian(seed);
    std::vector<Kernel3x3> kernels;
    kernels.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        const auto rotation = so3::sampleRotation(sigma, gaussian);
        const auto& base = family[static_cast<std::size_t>(k) % family.size()];
        kernels.push_back(scaled({rotation.matrix * base.mat}, alpha));
    }
    return kernels;
}

} // namespace

FilterBank generateBank(BankKind kind, int count, double alpha, double sigma,
                        std::uint64_t seed) {
    if (count < 1) fail(ErrorCode::BadConfig, "generateBank: count must be >= 1");
    if (alpha <= 0.0) fail(ErrorCode::BadConfig, "generateBank: alpha must be > 0");
    if (sigma < 0.0) fail(ErrorCode::BadConfig, "generateBank: sigma must be >= 0");

    FilterBank bank;
    bank.kind = kind;
    bank.alpha = alpha;
    bank.sigma = sigma;
    bank.seed = seed;

    switch (kind) {
        case BankKind::OF: {
            auto [a1, a2] = baseMatricesOF();
            bank.kernels = generateOrthogonalFamily({a1, a2}, count, alpha, sigma, seed);
            break;
        }
        case BankKind::OF_NONORTH: {
            auto [b1, b2] = baseMatricesNonOrthogonal();
            bank.kernels = generateOrthogonalFamily({b1, b2}, count, alpha, sigma, seed);
            break;
        }
        case BankKind::KF: {
            // Fibonacci lattice on (direction angle, profile mix angle).
            const double golden = 0.6180339887498949;
            for (int k = 0; k < count; ++k) {
                const double dir = 2.0 * M_PI * k / count;
                const double psi = 2.0 * M_PI * std::fmod(k * golden, 1.0);
                bank.kernels.push_back(
                    kleinFilter(QuadraticProfile::mixed(psi, std::cos(dir), std::sin(dir))));
            }
            break;
        }
        case BankKind::CF: {
            for (int k = 0; k < count; ++k)
                bank.kernels.push_back(circleFilter(2.0 * M_PI * k / count));
            break;
        }
        case BankKind::RANDOM: {
            GaussianSampler gaussian(seed);
            const double scale = alpha * std::sqrt(2.0 / 9.0); // fan-in 9
            for (int k = 0; k < count; ++k) {
                Kernel3x3 kernel;
                for (double& v : kernel.flat()) v = scale * gaussian.next();
                bank.kernels.push_back(kernel);
            }
            break;
        }
    }
    return bank;
}

namespace {

void appendReal(std::string& out, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

void validateBank(const FilterBank& bank) {
    for (const auto& k : bank.kernels) {
        if (!k.allFinite())
            fail(ErrorCode::ParseError, "filter bank: non-finite kernel entry");
    }
    const double normTol = 1e-6 * std::max(1.0, bank.alpha);
    if (bank.kind == BankKind::OF) {
        // The Eq.-(4) OF_NONORTH family deliberately breaks the zero
        // column-sum constraint, so that check applies to OF only.
        for (const auto& k : bank.kernels) {
            const Vec3 colSum = k.v1() + k.v2() + k.v3();
            if (colSum.norm() > 1e-6 * bank.alpha ||
                std::abs(geometry::kernelNorm(k) - bank.alpha) > normTol)
                fail(ErrorCode::ParseError,
                     "filter bank: OF kernel violates norm/column-sum constraints");
        }
    }
    if (bank.kind == BankKind::OF_NONORTH) {
        for (const auto& k : bank.kernels) {
            if (std::abs(geometry::kernelNorm(k) - bank.alpha) > normTol)
                fail(ErrorCode::ParseError,
                     "filter bank: OF_NONORTH kernel violates norm constraint");
        }
    }
    if (bank.kind == BankKind::KF || bank.kind == BankKind::CF) {
        for (const auto& k : bank.kernels) {
            double mean = 0.0;
            for (double v : k.flat()) mean += v;
            mean /= 9.0;
            if (std::abs(mean) > 1e-9 ||
                std::abs(k.mat.frobeniusNorm() - 1.0) > 1e-9)
                fail(ErrorCode::ParseError,
                     "filter bank: KF/CF kernel violates centering/norm constraints");
        }
    }
}

} // namespace

std::string bankToJson(const FilterBank& bank) {
    // Hand-rolled emitter: pins the byte-level layout (17 significant digits,
    // fixed key order) so regeneration is byte-identical.
    std::string out = "{\n";
    out += "  \"version\": 1,\n";
    out += "  \"kind\": \"";
    out += bankKindName(bank.kind);
    out += "\",\n  \"alpha\": ";
    appendReal(out, bank.alpha);
    out += ",\n  \"sigma\": ";
    appendReal(out, bank.sigma);
    out += ",\n  \"seed\": " + std::to_string(bank.seed);
    out += ",\n  \"kernels\": [\n";
    for (std::size_t k = 0; k < bank.kernels.size(); ++k) {
        out += "    [";
        const auto& flat = bank.kernels[k].flat();
        for (std::size_t i = 0; i < 9; ++i) {
            appendReal(out, flat[i]);
            if (i != 8) out += ", ";
        }
        out += (k + 1 == bank.kernels.size()) ? "]\n" : "],\n";
    }
    out += "  ]\n}\n";
    return out;
}

void saveBank(const FilterBank& bank, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(ErrorCode::IoError, "cannot write bank file: " + path);
    f << bankToJson(bank);
    if (!f) fail(ErrorCode::IoError, "write failed: " + path);
}

FilterBank bankFromJson(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ParseError, std::string("filter bank JSON: ") + e.what());
    }
    try {
        if (doc.at("version").get<int>() != 1)
            fail(ErrorCode::ParseError, "filter bank: unsupported version");
        FilterBank bank;
        bank.kind = bankKindFromName(doc.at("kind").get<std::string>());
        bank.alpha = doc.at("alpha").get<double>();
        bank.sigma = doc.at("sigma").get<double>();
        bank.seed = doc.at("seed").get<std::uint64_t>();
        for (const auto& row : doc.at("kernels")) {
            if (row.size() != 9)
                fail(ErrorCode::ParseError, "filter bank: kernel row must have 9 values");
            Kernel3x3 k;
            for (std::size_t i = 0; i < 9; ++i) k.flat()[i] = row[i].get<double>();
            bank.kernels.push_back(k);
        }
        validateBank(bank);
        return bank;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ParseError, std::string("filter bank JSON: ") + e.what());
    }
}

FilterBank loadBank(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail(ErrorCode::IoError, "cannot open bank file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return bankFromJson(buf.str());
}

} // namespace topokern::banks
