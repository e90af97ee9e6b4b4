#pragma once

#include <array>
#include <deque>
#include <optional>
#include <vector>

#include <Eigen/LU>

#include "hybridsim/ode.hpp"

namespace hybridsim {

/// Fixed-leading-coefficient BDF of order q on a uniform grid:
///   y_{n+1} = sum_{i=1..q} alpha_i y_{n+1-i} + h beta0 f(t_{n+1}, y_{n+1}).
struct BdfCoefficients {
    int order = 1;
    std::array<double, 5> alpha{};
    double beta0 = 1.0;
};

inline constexpr int kBdfMaxOrder = 5;
inline constexpr std::size_t kBdfMaxRecords = 6;

/// Coefficients for 1 <= q <= 5.
[[nodiscard]] const BdfCoefficients& bdf_coefficients(int q);

struct BdfRecord {
    double t = 0.0;
    Vector y;
};

/// Scaled local error estimates for orders q-1, q and q+1 (where the history
/// supports them).
struct BdfErrorEstimates {
    std::optional<double> lower;
    double current = 0.0;
    std::optional<double> higher;
};

struct BdfOrderChoice {
    int order = 1;
    double h = 0.0;
};

/// Picks the order among q-1, q, q+1 whose estimate permits the largest step
/// safety * err_k^(-1/(k+1)), and returns h * clamp(that factor, 0.2, 2.5).
/// A history with a single record forces order 1.
[[nodiscard]] BdfOrderChoice bdf_select_order_and_step(int q, double h,
                                                       const BdfErrorEstimates& estimates,
                                                       std::size_t records, double safety,
                                                       int max_order = kBdfMaxOrder);

struct BdfAttempt {
    AttemptStatus status = AttemptStatus::newton_failed;
    int order = 1;
    double err = 0.0;
    int newton_iters = 0;
    Vector y;
    BdfErrorEstimates estimates;
};

/// Variable-order (1-5), variable-step BDF. History lives on a uniform grid
/// and is re-interpolated onto the new spacing whenever h changes. The
/// predictor extrapolates the newest q+1 records (explicit Euler when only
/// one record exists); the corrector is solved by simplified Newton on
/// I - h beta0 J; the local error is beta0 / (q+1) times the difference
/// between corrector and predictor.
class BdfSolver final : public Integrator {
public:
    BdfSolver(OdeSystem system, IntegratorOptions options);

    void initialize(double t, const Vector& y) override;
    /// Clears the history to (t, y), drops to order 1 and takes a small
    /// step: min(last accepted h, 0.01 * mean of recent accepted h, h_max).
    void restart(double t, const Vector& y) override;
    void step(double t_stop) override;

    /// Replaces the history by exact records at uniform spacing (oldest
    /// first); used by order studies.
    void seed_history(const std::vector<double>& t, const std::vector<Vector>& y);

    /// One attempt of size h at the current order; commits nothing. h must
    /// equal the history spacing unless only one record is stored.
    [[nodiscard]] BdfAttempt attempt_step(double h);

    [[nodiscard]] double time() const override { return t_; }
    [[nodiscard]] const Vector& state() const override { return y_; }
    [[nodiscard]] double step_start() const override;
    [[nodiscard]] Vector dense_output(double t) const override;
    [[nodiscard]] double dense_component(double t, std::size_t i) const override;
    [[nodiscard]] CrossingSample crossing_sample(std::size_t component) const override;
    [[nodiscard]] const SolverCounters& counters() const override { return counters_; }
    [[nodiscard]] const IntegratorOptions& options() const override { return options_; }

    [[nodiscard]] const std::deque<BdfRecord>& history() const noexcept { return records_; }
    /// Order the next step will use.
    [[nodiscard]] int order() const noexcept;
    /// Order of the last accepted step.
    [[nodiscard]] int last_order() const noexcept { return last_order_; }
    [[nodiscard]] double current_step_size() const noexcept { return h_; }

private:
    void reset_history(double t, const Vector& y);
    void ensure_jacobian();
    void factorize(double hb);
    void rebuild_history(double h_new);
    [[nodiscard]] Vector difference(const Vector& y_new, int m) const;
    [[nodiscard]] std::size_t interpolant_points() const;

    OdeSystem sys_;
    IntegratorOptions options_;
    SolverCounters counters_;
    std::size_t n_ = 0;
    int max_newton_ = 4;
    double newton_tol_ = 0.03;
    int max_order_ = kBdfMaxOrder;

    double t_ = 0.0;
    Vector y_;
    Vector f0_;  // f at the newest record while it is the only one
    std::deque<BdfRecord> records_;  // oldest first, uniform spacing_
    double spacing_ = 0.0;
    double h_ = 0.0;
    bool need_initial_h_ = true;
    int order_ = 1;
    int last_order_ = 1;
    int steps_at_order_ = 0;
    bool after_restart_ = false;
    std::deque<double> recent_h_;  // last accepted step sizes

    Matrix jac_;
    bool have_jac_ = false;
    bool jac_current_ = false;
    int jac_age_ = 0;
    double lu_hb_ = 0.0;
    bool lu_valid_ = false;
    Eigen::PartialPivLU<Matrix> lu_;
    double eta_ = 1.0;
};

}  // namespace hybridsim
