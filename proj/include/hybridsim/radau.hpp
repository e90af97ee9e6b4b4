#pragma once

#include <array>

#include <Eigen/LU>

#include "hybridsim/ode.hpp"

namespace hybridsim {

/// Butcher tableau of the three-stage Radau IIA collocation method.
struct IrkTableau {
    std::array<std::array<double, 3>, 3> a{};
    std::array<double, 3> b{};
    std::array<double, 3> c{};
};

[[nodiscard]] const IrkTableau& radau_iia_tableau();

/// Stage data of one step: g[i] approximates y(t + c_i h); g[2] is the
/// step's end value.
struct IrkStages {
    double t = 0.0;
    double h = 0.0;
    Vector y0;
    std::array<Vector, 3> g;
};

/// Degree-3 collocation polynomial through (0, y0), (c1, g1), (c2, g2),
/// (1, g3), evaluated at theta (theta outside [0, 1] extrapolates).
[[nodiscard]] Vector collocation_value(const IrkStages& stages, double theta);
[[nodiscard]] double collocation_component(const IrkStages& stages, double theta, std::size_t i);

struct IrkAttempt {
    AttemptStatus status = AttemptStatus::newton_failed;
    double err = 0.0;  // scaled RMS error estimate
    int newton_iters = 0;
    IrkStages stages;  // valid unless newton_failed
};

/// Three-stage order-5 Radau IIA integrator. The 3N stage system is solved
/// by simplified Newton on the dense Kronecker matrix I - h (A x J); the
/// error estimate is the Hairer-Wanner embedded order-3 formula
///
///   err = (I - h gamma0 J)^{-1} [gamma0 h f(t, y) + sum_i e_i Z_i],
///
/// with Z_i = g_i - y, gamma0 = 1 / 3.6378... (the real eigenvalue of A^{-1})
/// and e = gamma0 * (-(13 + 7 sqrt6) / 3, (-13 + 7 sqrt6) / 3, -1 / 3).
/// When that estimate exceeds 1 it is filtered once more through
/// f(t, y + err). Steps are accepted iff err <= 1 and resized by
/// clamp(safety * err^{-1/4}, 0.2, 5).
class RadauSolver final : public Integrator {
public:
    RadauSolver(OdeSystem system, IntegratorOptions options);

    void initialize(double t, const Vector& y) override;
    void restart(double t, const Vector& y) override;
    void step(double t_stop) override;

    /// One attempt of size h from the current point; commits nothing.
    [[nodiscard]] IrkAttempt attempt_step(double h);

    [[nodiscard]] double time() const override { return t_; }
    [[nodiscard]] const Vector& state() const override { return y_; }
    [[nodiscard]] double step_start() const override { return last_.t; }
    [[nodiscard]] Vector dense_output(double t) const override;
    [[nodiscard]] double dense_component(double t, std::size_t i) const override;
    [[nodiscard]] CrossingSample crossing_sample(std::size_t component) const override;
    [[nodiscard]] const SolverCounters& counters() const override { return counters_; }
    [[nodiscard]] const IntegratorOptions& options() const override { return options_; }

    [[nodiscard]] const IrkStages& last_stages() const noexcept { return last_; }
    [[nodiscard]] double current_step_size() const noexcept { return h_; }

private:
    void ensure_jacobian();
    void factorize(double h);
    void start(double t, const Vector& y);

    OdeSystem sys_;
    IntegratorOptions options_;
    SolverCounters counters_;
    std::size_t n_ = 0;
    int max_newton_ = 7;
    double newton_tol_ = 0.03;

    double t_ = 0.0;
    Vector y_;
    Vector f0_;  // f(t_, y_)
    double h_ = 0.0;
    bool need_initial_h_ = true;
    bool have_last_ = false;  // last_ usable for Newton starting values
    bool after_restart_ = false;
    IrkStages last_;

    Matrix jac_;
    bool jac_current_ = false;  // evaluated at (t_, y_)
    int jac_age_ = 0;
    double lu_h_ = 0.0;  // step size of the current factorizations
    bool lu_valid_ = false;
    Eigen::PartialPivLU<Matrix> stage_lu_;
    Eigen::PartialPivLU<Matrix> error_lu_;
    double eta_ = 1.0;  // Newton contraction carried across steps

    // scratch
    Vector z_, dz_, rhs_, f_stage_, tmp_;
};

}  // namespace hybridsim
