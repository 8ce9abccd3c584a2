#pragma once

#include <Eigen/Dense>

#include <array>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace linecospar {

// Uniformly sampled gait: CoM, CoP, goal CoM, swing foot and its goal, all
// in meters, with CoM and CoP velocities in m/s.
struct GaitTrajectory {
    std::string gait_id;
    Eigen::VectorXd t;
    Eigen::VectorXd x_com, y_com, x_cop, y_cop;
    Eigen::VectorXd xg_com, yg_com;
    Eigen::VectorXd px, py, pxg, pyg;
    Eigen::VectorXd vx_com, vy_com, vx_cop, vy_cop;

    Eigen::Index size() const { return t.size(); }
    // Throws MalformedTrajectory unless every series has the same length >= 2
    // and the time stamps are strictly increasing and uniform.
    void validate() const;
};

// Central differences inside, one-sided at the ends.
Eigen::VectorXd differentiate(const Eigen::VectorXd & values, double dt);

// Reads the trajectory column layout t, x_com, y_com, x_cop, y_cop, xg_com,
// yg_com, px, py, pxg, pyg [, vx_com, vy_com, vx_cop, vy_cop]. Missing
// velocities are differentiated from the positions.
GaitTrajectory read_trajectory_csv(const std::filesystem::path & path, const std::string & gait_id);
void write_trajectory_csv(std::ostream & out, const GaitTrajectory & traj);

// Time-averaged squared norms: goal CoM error, CoM velocity, CoP velocity,
// swing-foot goal error.
using GaitTerms = std::array<double, 4>;
GaitTerms extract_features(const GaitTrajectory & traj);

// Mean ‖CoM − CoP‖² over the trajectory.
double static_cost(const GaitTrajectory & traj);

struct CopStep {
    double t_begin = 0.0;  // the CoP sits at (x, y) from t_begin until the next step
    double x = 0.0;
    double y = 0.0;
};

struct LipmConfig {
    double z0 = 1.0;
    double g = 9.81;
    double duration = 1.0;
    double dt = 0.01;
    Eigen::Vector2d com0 = Eigen::Vector2d::Zero();
    Eigen::Vector2d vcom0 = Eigen::Vector2d::Zero();
    std::vector<CopStep> cop;  // empty: CoP fixed at the origin
    Eigen::Vector2d com_goal = Eigen::Vector2d::Zero();
    Eigen::Vector2d foot_start = Eigen::Vector2d::Zero();
    Eigen::Vector2d foot_goal = Eigen::Vector2d::Zero();

    void validate() const;
};

// Integrates ẍ = (g/z0)(x − x_cop) (same for y) with classical RK4. The swing
// foot moves from foot_start to foot_goal on a cosine profile over the
// duration.
GaitTrajectory simulate_lipm(const LipmConfig & cfg, const std::string & gait_id = "lipm");

struct CostWeights {
    Eigen::Vector4d w = Eigen::Vector4d::Zero();
    bool feasible = true;
    int dropped = 0;  // all-zero difference rows ignored
};

inline constexpr double kMarginEps = 1e-6;
inline constexpr double kSoftMarginLambda = 1e-3;

// min ‖w‖² s.t. δ_k·w ≤ −ε for every row, with δ = preferred − other terms.
// When no w satisfies the constraints, returns the soft-margin solution of
// min Σ max(0, δ_k·w + ε) + λ‖w‖² with feasible = false. Throws
// DegenerateFeatures when every row is zero.
CostWeights fit_weights(const std::vector<GaitTerms> & deltas);

struct PreferencePair {
    std::string subject_id;
    std::string preferred_id;
    std::string other_id;
    GaitTerms preferred{};
    GaitTerms other{};
    double preferred_static = 0.0;
    double other_static = 0.0;

    GaitTerms delta() const;
};

enum class CostKind { Lipm, Static, Dynamic };
std::string to_string(CostKind kind);

struct SubjectScore {
    CostKind kind = CostKind::Lipm;
    std::string subject_id;
    double accuracy_pct = 0.0;
    Eigen::Vector4d w = Eigen::Vector4d::Constant(std::numeric_limits<double>::quiet_NaN());
    bool feasible = true;
    int pairs = 0;
};

// Percentage of pairs whose preferred gait has strictly lower cost.
double rank_consistency(const std::vector<PreferencePair> & pairs, CostKind kind, const Eigen::Vector4d & w);

// Per-subject accuracy. Lipm weights are fitted on the subject's own pairs,
// or with holdout on every other subject's pairs. Static and Dynamic costs
// have no free weights.
std::vector<SubjectScore> predictive_power(const std::vector<PreferencePair> & pairs, CostKind kind, bool holdout);

// Joins preference rows (subject_id, preferred_gait_id, other_gait_id) with
// trajectories loaded from <traj_dir>/<gait_id>.csv.
std::vector<PreferencePair> load_preferences(const std::filesystem::path & prefs_csv,
                                             const std::filesystem::path & traj_dir);

void write_report_csv(std::ostream & out, const std::vector<SubjectScore> & scores);

}  // namespace linecospar
