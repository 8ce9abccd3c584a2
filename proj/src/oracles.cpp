#include "linecospar/oracles.hpp"

#include "linecospar/errors.hpp"
#include "linecospar/prefgp.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace linecospar {

namespace {

constexpr std::array<double, 4> kHartmannAlpha = {1.0, 1.2, 3.0, 3.2};

constexpr double kH3A[4][3] = {{3.0, 10.0, 30.0}, {0.1, 10.0, 35.0}, {3.0, 10.0, 30.0}, {0.1, 10.0, 35.0}};
constexpr double kH3P[4][3] = {{0.3689, 0.1170, 0.2673},
                               {0.4699, 0.4387, 0.7470},
                               {0.1091, 0.8732, 0.5547},
                               {0.0381, 0.5743, 0.8828}};

constexpr double kH6A[4][6] = {{10.0, 3.0, 17.0, 3.5, 1.7, 8.0},
                               {0.05, 10.0, 17.0, 0.1, 8.0, 14.0},
                               {3.0, 3.5, 1.7, 10.0, 17.0, 8.0},
                               {17.0, 8.0, 0.05, 10.0, 0.1, 14.0}};
constexpr double kH6P[4][6] = {{0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
                               {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
                               {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
                               {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381}};

template <int D>
double hartmann(const double (&a)[4][D], const double (&p)[4][D], const Eigen::VectorXd & x) {
    if (x.size() != D) throw DimensionMismatch("Hartmann" + std::to_string(D) + " needs " + std::to_string(D) + " coordinates");
    double sum = 0.0;
    for (int i = 0; i < 4; ++i) {
        double inner = 0.0;
        for (int j = 0; j < D; ++j) {
            const double diff = x[j] - p[i][j];
            inner += a[i][j] * diff * diff;
        }
        sum += kHartmannAlpha[i] * std::exp(-inner);
    }
    return -sum;
}

}  // namespace

double hartmann3(const Eigen::VectorXd & a) { return hartmann<3>(kH3A, kH3P, a); }
double hartmann6(const Eigen::VectorXd & a) { return hartmann<6>(kH6A, kH6P, a); }

int ObjectiveSpec::dims() const {
    switch (kind) {
    case ObjectiveKind::Hartmann3: return 3;
    case ObjectiveKind::Hartmann6: return 6;
    case ObjectiveKind::RandomPolynomial: return static_cast<int>(poly_alpha.size());
    }
    return 0;
}

void ObjectiveSpec::validate() const {
    if (kind == ObjectiveKind::RandomPolynomial) {
        if (poly_alpha.size() == 0 || poly_alpha.size() != poly_beta.size())
            throw InvalidArgument("polynomial needs α and β of equal, nonzero length");
        if ((poly_alpha.array().abs() > 1.0).any() || (poly_beta.array().abs() > 1.0).any())
            throw InvalidArgument("polynomial coefficients must lie in [-1, 1]");
    } else if (poly_alpha.size() || poly_beta.size()) {
        throw InvalidArgument("Hartmann objectives take no polynomial coefficients");
    }
}

ObjectiveSpec ObjectiveSpec::hartmann3() { return ObjectiveSpec{ObjectiveKind::Hartmann3, {}, {}, false}; }
ObjectiveSpec ObjectiveSpec::hartmann6() { return ObjectiveSpec{ObjectiveKind::Hartmann6, {}, {}, false}; }

ObjectiveSpec ObjectiveSpec::random_polynomial(int dims, std::mt19937_64 & rng) {
    if (dims < 1) throw InvalidArgument("polynomial dimension must be positive");
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    ObjectiveSpec obj{ObjectiveKind::RandomPolynomial, Eigen::VectorXd(dims), Eigen::VectorXd(dims), false};
    for (int i = 0; i < dims; ++i) obj.poly_alpha[i] = unif(rng);
    for (int i = 0; i < dims; ++i) obj.poly_beta[i] = unif(rng);
    return obj;
}

double evaluate(const ObjectiveSpec & obj, const Eigen::VectorXd & a) {
    switch (obj.kind) {
    case ObjectiveKind::Hartmann3: return -hartmann3(a);
    case ObjectiveKind::Hartmann6: return -hartmann6(a);
    case ObjectiveKind::RandomPolynomial: {
        if (a.size() != obj.poly_alpha.size())
            throw DimensionMismatch("polynomial expects " + std::to_string(obj.poly_alpha.size()) + " coordinates");
        // Σ_i α_i Σ_j β_j a_j
        double value = obj.poly_alpha.sum() * obj.poly_beta.dot(a);
        if (obj.poly_quadratic) value -= (a.array() - 0.5).square().sum();
        return value;
    }
    }
    throw InvalidArgument("unknown objective kind");
}

std::string to_string(ObjectiveKind kind) {
    switch (kind) {
    case ObjectiveKind::Hartmann3: return "h3";
    case ObjectiveKind::Hartmann6: return "h6";
    case ObjectiveKind::RandomPolynomial: return "poly";
    }
    return "?";
}

ObjectiveKind objective_kind_from_string(const std::string & name) {
    if (name == "h3") return ObjectiveKind::Hartmann3;
    if (name == "h6") return ObjectiveKind::Hartmann6;
    if (name == "poly") return ObjectiveKind::RandomPolynomial;
    throw InvalidArgument("unknown objective '" + name + "' (expected h3, h6 or poly)");
}

SimSubject::SimSubject(ObjectiveSpec objective, double noise_ch, bool coactive_enabled, std::uint64_t seed)
    : objective_(std::move(objective)), noise_ch_(noise_ch), coactive_enabled_(coactive_enabled), rng_(seed) {
    objective_.validate();
    if (!std::isfinite(noise_ch_) || noise_ch_ < 0.0) throw InvalidArgument("noise level c_h must be finite and >= 0");
}

Preference SimSubject::preference(const Eigen::VectorXd & a1, const Eigen::VectorXd & a2) {
    const double s = evaluate(objective_, a1) - evaluate(objective_, a2);
    if (noise_ch_ == 0.0) return s > 0.0 ? Preference::FirstPreferred : Preference::SecondPreferred;
    std::bernoulli_distribution first(sigmoid_link(s / noise_ch_));
    return first(rng_) ? Preference::FirstPreferred : Preference::SecondPreferred;
}

std::optional<Eigen::VectorXd> SimSubject::coactive_suggestion(const Eigen::VectorXd & a, double step) {
    std::uniform_int_distribution<int> dim(0, static_cast<int>(a.size()) - 1);
    std::bernoulli_distribution positive(0.5);
    const int i = dim(rng_);
    const double sign = positive(rng_) ? 1.0 : -1.0;
    Eigen::VectorXd moved = a;
    moved[i] = std::clamp(a[i] + sign * step, 0.0, 1.0);
    if (evaluate(objective_, moved) > evaluate(objective_, a)) return moved;
    return std::nullopt;
}

FeedbackBundle SimSubject::feedback(const Action & current, const Action * previous, double coactive_step) {
    FeedbackBundle fb;
    fb.preference_source = FeedbackSource::Simulated;
    if (previous) fb.preference = preference(current.coords, previous->coords);
    if (coactive_enabled_) fb.coactive = coactive_suggestion(current.coords, coactive_step);
    return fb;
}

}  // namespace linecospar
