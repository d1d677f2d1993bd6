#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Sparse>

#include "xbar/crossbar.hpp"

namespace xbar {

enum class NewtonLinearSolve {
    Auto,               // direct below `pcg_threshold` unknowns, PCG above
    Direct,             // refactor the Jacobian every Newton step
    PreconditionedCG,   // CG preconditioned by the factored zero-bias Jacobian
};

struct SolverOptions {
    double abs_tol = 1e-12;        // A, max node current imbalance
    int max_newton_iters = 50;
    double damping = 1.0;          // initial step scale of the line search
    int max_halvings = 20;
    int polish_steps = 2;          // Newton steps taken after abs_tol is met
    NewtonLinearSolve newton_linear = NewtonLinearSolve::Auto;
    std::size_t pcg_threshold = 20000;
    double pcg_rel_tol = 1e-6;
    int pcg_max_iters = 500;

    void validate() const;
};

/// Solved network. `terminal_currents[t]` is the current injected into the
/// network by terminal t (negative when the terminal absorbs current).
struct Solution {
    std::vector<double> node_voltages;
    std::vector<double> branch_currents;
    std::vector<double> terminal_currents;
    double kcl_residual = 0.0;
    int iterations = 0;
    std::vector<double> residual_history;  // 2-norm of the KCL residual at each accepted Newton iterate
};

/// Reusable solver for one network topology.
///
/// The reduced nodal system (fixed nodes eliminated) depends only on the
/// topology and the device parameters, not on the terminal voltages, so it is
/// analyzed and factored once. Linear networks then cost one triangular solve
/// per bias; nonlinear networks reuse the zero-bias Jacobian factorization as
/// a CG preconditioner. The referenced Network must outlive the solver.
class NetworkSolver {
public:
    explicit NetworkSolver(const Network& net, SolverOptions opts = {});
    ~NetworkSolver();
    NetworkSolver(NetworkSolver&&) noexcept;
    NetworkSolver& operator=(NetworkSolver&&) noexcept;

    const Network& network() const noexcept { return *net_; }
    std::size_t unknown_count() const noexcept;

    Solution solve() const;
    Solution solve(std::span<const double> terminal_voltages) const;

private:
    struct Impl;
    const Network* net_;
    std::unique_ptr<Impl> impl_;
};

/// Direct sparse solve; all devices must be linear.
Solution solve_linear(const Network& net, const SolverOptions& opts = {});

/// Damped Newton iteration on the nodal residual.
Solution solve_nonlinear(const Network& net, const SolverOptions& opts = {});

/// Dispatches on the device model.
Solution solve(const Network& net, const SolverOptions& opts = {});

/// Independent oracle: dense assembly, partial-pivot elimination and full-matrix
/// Newton. Limited to networks of at most `kDenseNodeCap` nodes.
inline constexpr std::size_t kDenseNodeCap = 5000;
Solution dense_reference_solve(const Network& net, const SolverOptions& opts = {});

/// Current absorbed by each bitline termination (positive into the sense node).
/// Throws std::logic_error for a floating bitline.
std::vector<double> bitline_currents(const Network& net, const Solution& sol);

/// Voltage at the sense end (bottom) of each bitline.
std::vector<double> bitline_sense_voltages(const Network& net, const Solution& sol);

/// Branch currents and KCL residual for given node voltages.
void evaluate_branches(const Network& net, std::span<const double> node_voltages, Solution& out);

/// Full (unreduced) node admittance matrix of a linear network, terminal
/// branches included. Symmetric, rows summing to zero.
Eigen::SparseMatrix<double> node_admittance(const Network& net);

/// Plain-text dump of the reduced system and solution in a MatrixMarket-like
/// layout (see docs in README).
void write_system_dump(std::ostream& os, const Network& net, const Solution& sol);

}  // namespace xbar
