#pragma once

#include "linecospar/action.hpp"
#include "linecospar/optimizer.hpp"

#include <Eigen/Dense>

#include <optional>
#include <random>
#include <string>

namespace linecospar {

enum class ObjectiveKind { Hartmann3, Hartmann6, RandomPolynomial };

// Synthetic objective on [0,1]^d where larger is better. The Hartmann kinds
// are the standard minimization benchmarks with the sign flipped.
struct ObjectiveSpec {
    ObjectiveKind kind = ObjectiveKind::Hartmann3;
    Eigen::VectorXd poly_alpha;  // RandomPolynomial only
    Eigen::VectorXd poly_beta;
    // Adds -Σ (a_j - 0.5)² to the polynomial. Not part of the benchmark suite.
    bool poly_quadratic = false;

    int dims() const;
    void validate() const;

    static ObjectiveSpec hartmann3();
    static ObjectiveSpec hartmann6();
    // α, β ~ U(-1, 1) independently.
    static ObjectiveSpec random_polynomial(int dims, std::mt19937_64 & rng);
};

// Throws DimensionMismatch when the action dimension does not fit the objective.
double evaluate(const ObjectiveSpec & obj, const Eigen::VectorXd & a);

double hartmann3(const Eigen::VectorXd & a);  // standard (minimization) form
double hartmann6(const Eigen::VectorXd & a);

std::string to_string(ObjectiveKind kind);
ObjectiveKind objective_kind_from_string(const std::string & name);

// A simulated user: compares executed actions through the objective, with
// logistic noise of temperature noise_ch (0 = ideal comparisons), and
// optionally offers one-dimension coactive improvements.
class SimSubject {
  public:
    SimSubject(ObjectiveSpec objective, double noise_ch, bool coactive_enabled, std::uint64_t seed);

    // FirstPreferred with probability 1 / (1 + exp(-(f(a1) - f(a2)) / c_h)).
    // With c_h = 0: FirstPreferred iff f(a1) > f(a2).
    Preference preference(const Eigen::VectorXd & a1, const Eigen::VectorXd & a2);

    // One random (dimension, sign) step of size `step`, clipped to the cube.
    // Returned only when it strictly improves the objective.
    std::optional<Eigen::VectorXd> coactive_suggestion(const Eigen::VectorXd & a, double step);

    // Adapts the subject to the optimizer loop: preference against the
    // previous action plus (if enabled) a coactive suggestion.
    FeedbackBundle feedback(const Action & current, const Action * previous, double coactive_step);

    const ObjectiveSpec & objective() const { return objective_; }
    double noise_ch() const { return noise_ch_; }
    bool coactive_enabled() const { return coactive_enabled_; }

  private:
    ObjectiveSpec objective_;
    double noise_ch_;
    bool coactive_enabled_;
    std::mt19937_64 rng_;
};

}  // namespace linecospar
