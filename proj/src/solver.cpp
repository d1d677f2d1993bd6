#include "xbar/solver.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "xbar/error.hpp"

namespace xbar {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;
using Triplet = Eigen::Triplet<double>;

constexpr std::int64_t kFixed = -1;

void check_anchored(const Network& net, const char* who) {
    if (auto comp = net.floating_component())
        throw SingularNetworkError(std::string(who) + ": singular system, " + std::to_string(comp->size()) +
                                       "-node floating subnetwork containing node " + std::to_string(comp->front()),
                                   std::move(*comp));
}

double branch_current(const Network& net, const Branch& b, double dv) {
    if (b.kind == BranchKind::Device) return device_current(net.cell(b.row, b.col), dv);
    return b.g * dv;
}

double branch_conductance(const Network& net, const Branch& b, double dv) {
    if (b.kind == BranchKind::Device) return device_conductance(net.cell(b.row, b.col), dv);
    return b.g;
}

/// Voltages of all nodes: fixed nodes from the terminal voltages, free nodes at `fill`.
std::vector<double> initial_voltages(const Network& net, std::span<const double> tv, double fill) {
    std::vector<double> v(net.node_count(), fill);
    for (std::size_t t = 0; t < net.terminals().size(); ++t) v[net.terminals()[t].fixed_node] = tv[t];
    return v;
}

double modal_voltage(std::span<const double> tv) {
    std::map<double, std::size_t> freq;
    for (double v : tv) ++freq[v];
    double best_v = 0.0;
    std::size_t best = 0;
    for (const auto& [v, n] : freq)
        if (n > best) {
            best = n;
            best_v = v;
        }
    return best_v;
}

}  // namespace

void SolverOptions::validate() const {
    if (!(abs_tol > 0.0)) throw std::invalid_argument("solver.abs_tol: must be > 0");
    if (max_newton_iters < 1) throw std::invalid_argument("solver.max_newton_iters: must be >= 1");
    if (!(damping > 0.0 && damping <= 1.0)) throw std::invalid_argument("solver.damping: must be in (0, 1]");
    if (max_halvings < 0) throw std::invalid_argument("solver.max_halvings: must be >= 0");
    if (polish_steps < 0) throw std::invalid_argument("solver.polish_steps: must be >= 0");
    if (!(pcg_rel_tol > 0.0 && pcg_rel_tol < 1.0)) throw std::invalid_argument("solver.pcg_rel_tol: must be in (0, 1)");
}

void evaluate_branches(const Network& net, std::span<const double> v, Solution& out) {
    const auto& branches = net.branches();
    out.node_voltages.assign(v.begin(), v.end());
    out.branch_currents.resize(branches.size());
    std::vector<double> leaving(net.node_count(), 0.0);
    for (std::size_t k = 0; k < branches.size(); ++k) {
        const auto& b = branches[k];
        const double i = branch_current(net, b, v[b.from] - v[b.to]);
        out.branch_currents[k] = i;
        leaving[b.from] += i;
        leaving[b.to] -= i;
    }
    out.terminal_currents.resize(net.terminals().size());
    for (std::size_t t = 0; t < net.terminals().size(); ++t) {
        const auto& term = net.terminals()[t];
        out.terminal_currents[t] =
            term.branch >= 0 ? out.branch_currents[static_cast<std::size_t>(term.branch)] : leaving[term.fixed_node];
    }
    double worst = 0.0;
    for (std::size_t n = 0; n < leaving.size(); ++n)
        if (!net.is_fixed(n)) worst = std::max(worst, std::abs(leaving[n]));
    out.kcl_residual = worst;
}

// ---------------------------------------------------------------------------

struct NetworkSolver::Impl {
    const Network& net;
    SolverOptions opts;
    std::vector<std::int64_t> unknown_of;
    std::vector<std::uint32_t> node_of;
    bool linear = true;
    bool use_pcg = false;
    SpMat base;  // G for linear networks, zero-bias Jacobian otherwise
    Eigen::SimplicialLLT<SpMat> llt;

    Impl(const Network& n, SolverOptions o) : net(n), opts(o) {
        opts.validate();
        check_anchored(net, "NetworkSolver");
        unknown_of.assign(net.node_count(), kFixed);
        for (std::size_t k = 0; k < net.node_count(); ++k)
            if (!net.is_fixed(k)) {
                unknown_of[k] = static_cast<std::int64_t>(node_of.size());
                node_of.push_back(static_cast<std::uint32_t>(k));
            }
        linear = net.model() == DeviceModel::Linear;
        const std::size_t n_unknown = node_of.size();
        use_pcg = !linear && (opts.newton_linear == NewtonLinearSolve::PreconditionedCG ||
                              (opts.newton_linear == NewtonLinearSolve::Auto && n_unknown > opts.pcg_threshold));
        if (n_unknown == 0) return;
        std::vector<double> zero(net.node_count(), 0.0);
        base = assemble(zero);
        if (linear || use_pcg) {
            llt.compute(base);
            if (llt.info() != Eigen::Success)
                throw SingularNetworkError("NetworkSolver: factorization failed (matrix not positive definite)", {});
        }
    }

    /// Reduced Jacobian (= G for linear branches) at node voltages v.
    SpMat assemble(const std::vector<double>& v) const {
        const std::size_t n = node_of.size();
        std::vector<Triplet> trip;
        trip.reserve(4 * net.branches().size());
        for (const auto& b : net.branches()) {
            const double g = branch_conductance(net, b, v[b.from] - v[b.to]);
            const auto ua = unknown_of[b.from], ub = unknown_of[b.to];
            if (ua != kFixed) trip.emplace_back(ua, ua, g);
            if (ub != kFixed) trip.emplace_back(ub, ub, g);
            if (ua != kFixed && ub != kFixed) {
                trip.emplace_back(ua, ub, -g);
                trip.emplace_back(ub, ua, -g);
            }
        }
        SpMat m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        m.setFromTriplets(trip.begin(), trip.end());
        return m;
    }

    /// KCL residual (current leaving each free node) at full node voltages v.
    Vec residual(const std::vector<double>& v) const {
        Vec f = Vec::Zero(static_cast<Eigen::Index>(node_of.size()));
        for (const auto& b : net.branches()) {
            const double i = branch_current(net, b, v[b.from] - v[b.to]);
            const auto ua = unknown_of[b.from], ub = unknown_of[b.to];
            if (ua != kFixed) f[ua] += i;
            if (ub != kFixed) f[ub] -= i;
        }
        return f;
    }

    Solution finish(const std::vector<double>& v, int iterations, std::vector<double> history) const {
        Solution s;
        evaluate_branches(net, v, s);
        s.iterations = iterations;
        s.residual_history = std::move(history);
        return s;
    }

    Solution solve_linear(std::span<const double> tv) const {
        std::vector<double> v = initial_voltages(net, tv, 0.0);
        const auto n = static_cast<Eigen::Index>(node_of.size());
        if (n > 0) {
            Vec rhs = Vec::Zero(n);
            for (const auto& b : net.branches()) {
                const auto ua = unknown_of[b.from], ub = unknown_of[b.to];
                if (ua != kFixed && ub == kFixed) rhs[ua] += b.g * v[b.to];
                if (ub != kFixed && ua == kFixed) rhs[ub] += b.g * v[b.from];
            }
            Vec x = llt.solve(rhs);
            // One step of iterative refinement.
            const Vec r = rhs - base * x;
            x += llt.solve(r);
            for (Eigen::Index k = 0; k < n; ++k) v[node_of[static_cast<std::size_t>(k)]] = x[k];
        }
        Solution s = finish(v, 1, {});
        if (!(s.kcl_residual <= opts.abs_tol))
            throw ConvergenceError("solve_linear: KCL residual " + std::to_string(s.kcl_residual) +
                                       " A exceeds tolerance",
                                   s.kcl_residual, 1);
        return s;
    }

    Vec jacobian_times(const std::vector<double>& g, const Vec& p) const {
        Vec y = Vec::Zero(p.size());
        const auto& branches = net.branches();
        for (std::size_t k = 0; k < branches.size(); ++k) {
            const auto& b = branches[k];
            const auto ua = unknown_of[b.from], ub = unknown_of[b.to];
            const double pa = ua != kFixed ? p[ua] : 0.0;
            const double pb = ub != kFixed ? p[ub] : 0.0;
            const double i = g[k] * (pa - pb);
            if (ua != kFixed) y[ua] += i;
            if (ub != kFixed) y[ub] -= i;
        }
        return y;
    }

    Vec pcg(const std::vector<double>& g, const Vec& rhs) const {
        Vec x = Vec::Zero(rhs.size());
        Vec r = rhs;
        const double stop = opts.pcg_rel_tol * rhs.norm();
        Vec z = llt.solve(r);
        Vec p = z;
        double rz = r.dot(z);
        for (int k = 0; k < opts.pcg_max_iters; ++k) {
            const Vec ap = jacobian_times(g, p);
            const double pap = p.dot(ap);
            if (!(pap > 0.0)) break;
            const double alpha = rz / pap;
            x += alpha * p;
            r -= alpha * ap;
            if (r.norm() <= stop) break;
            z = llt.solve(r);
            const double rz_next = r.dot(z);
            p = z + (rz_next / rz) * p;
            rz = rz_next;
        }
        return x;
    }

    Solution solve_nonlinear(std::span<const double> tv) const {
        std::vector<double> v = initial_voltages(net, tv, modal_voltage(tv));
        const auto n = static_cast<Eigen::Index>(node_of.size());
        std::vector<double> history;
        Vec f = residual(v);
        double norm = f.norm();
        history.push_back(norm);

        Eigen::SimplicialLLT<SpMat> local;
        if (!use_pcg && n > 0) local.analyzePattern(base);
        std::vector<double> g(net.branches().size());

        // One damped Newton step; returns false if the line search finds no decrease.
        auto newton_step = [&](int it) {
            Vec dx;
            if (use_pcg) {
                for (std::size_t k = 0; k < g.size(); ++k) {
                    const auto& b = net.branches()[k];
                    g[k] = branch_conductance(net, b, v[b.from] - v[b.to]);
                }
                dx = pcg(g, -f);
            } else {
                local.factorize(assemble(v));
                if (local.info() != Eigen::Success)
                    throw ConvergenceError("solve_nonlinear: Jacobian factorization failed", f.lpNorm<Eigen::Infinity>(), it);
                dx = local.solve(-f);
            }
            double step = opts.damping;
            std::vector<double> trial = v;
            for (int h = 0; h <= opts.max_halvings; ++h, step *= 0.5) {
                for (Eigen::Index k = 0; k < n; ++k) {
                    const auto node = node_of[static_cast<std::size_t>(k)];
                    trial[node] = v[node] + step * dx[k];
                }
                Vec ft = residual(trial);
                const double nt = ft.norm();
                if (std::isfinite(nt) && nt < norm) {
                    v.swap(trial);
                    f = std::move(ft);
                    norm = nt;
                    return true;
                }
            }
            return false;
        };

        for (int it = 1; it <= opts.max_newton_iters; ++it) {
            if (n == 0 || f.lpNorm<Eigen::Infinity>() <= opts.abs_tol) {
                // Extra steps toward the rounding floor; not counted as iterations.
                for (int p = 0; n > 0 && p < opts.polish_steps && norm > 0.0; ++p)
                    if (!newton_step(it)) break;
                return finish(v, it, std::move(history));
            }
            if (it == opts.max_newton_iters) break;
            if (!newton_step(it)) {
                const double res = f.lpNorm<Eigen::Infinity>();
                throw ConvergenceError("solve_nonlinear: line search stalled at KCL residual " + std::to_string(res) + " A",
                                       res, it);
            }
            history.push_back(norm);
        }
        const double res = f.lpNorm<Eigen::Infinity>();
        throw ConvergenceError("solve_nonlinear: no convergence in " + std::to_string(opts.max_newton_iters) +
                                   " iterations, KCL residual " + std::to_string(res) + " A",
                               res, opts.max_newton_iters);
    }
};

NetworkSolver::NetworkSolver(const Network& net, SolverOptions opts)
    : net_(&net), impl_(std::make_unique<Impl>(net, opts)) {}
NetworkSolver::~NetworkSolver() = default;
NetworkSolver::NetworkSolver(NetworkSolver&&) noexcept = default;
NetworkSolver& NetworkSolver::operator=(NetworkSolver&&) noexcept = default;

std::size_t NetworkSolver::unknown_count() const noexcept { return impl_->node_of.size(); }

Solution NetworkSolver::solve() const { return solve(net_->terminal_voltages()); }

Solution NetworkSolver::solve(std::span<const double> tv) const {
    if (tv.size() != net_->terminals().size()) throw std::invalid_argument("NetworkSolver::solve: terminal count mismatch");
    return impl_->linear ? impl_->solve_linear(tv) : impl_->solve_nonlinear(tv);
}

Solution solve_linear(const Network& net, const SolverOptions& opts) {
    if (net.model() != DeviceModel::Linear) throw std::invalid_argument("solve_linear: network has nonlinear devices");
    return NetworkSolver(net, opts).solve();
}

Solution solve_nonlinear(const Network& net, const SolverOptions& opts) {
    if (net.model() != DeviceModel::Nonlinear) throw std::invalid_argument("solve_nonlinear: network has linear devices");
    return NetworkSolver(net, opts).solve();
}

Solution solve(const Network& net, const SolverOptions& opts) { return NetworkSolver(net, opts).solve(); }

std::vector<double> bitline_currents(const Network& net, const Solution& sol) {
    std::vector<double> out(net.cols());
    for (std::size_t j = 0; j < net.cols(); ++j) {
        const auto t = net.bitline_terminal(j);
        if (!t) throw std::logic_error("bitline_currents: bitline " + std::to_string(j) + " is floating (no sense path)");
        out[j] = -sol.terminal_currents.at(*t);
    }
    return out;
}

std::vector<double> bitline_sense_voltages(const Network& net, const Solution& sol) {
    std::vector<double> out(net.cols());
    for (std::size_t j = 0; j < net.cols(); ++j) out[j] = sol.node_voltages.at(net.bitline_node(net.rows() - 1, j));
    return out;
}

// Nonlinear devices contribute their small-signal conductance at 0 V.
SpMat node_admittance(const Network& net) {
    const auto n = static_cast<Eigen::Index>(net.node_count());
    std::vector<Triplet> trip;
    trip.reserve(4 * net.branches().size());
    for (const auto& b : net.branches()) {
        const double g = branch_conductance(net, b, 0.0);
        trip.emplace_back(b.from, b.from, g);
        trip.emplace_back(b.to, b.to, g);
        trip.emplace_back(b.from, b.to, -g);
        trip.emplace_back(b.to, b.from, -g);
    }
    SpMat m(n, n);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

void write_system_dump(std::ostream& os, const Network& net, const Solution& sol) {
    std::vector<std::int64_t> unknown_of(net.node_count(), kFixed);
    std::vector<std::uint32_t> node_of;
    for (std::size_t k = 0; k < net.node_count(); ++k)
        if (!net.is_fixed(k)) {
            unknown_of[k] = static_cast<std::int64_t>(node_of.size());
            node_of.push_back(static_cast<std::uint32_t>(k));
        }
    std::map<std::pair<std::int64_t, std::int64_t>, double> entries;
    for (const auto& b : net.branches()) {
        const auto& v = sol.node_voltages;
        const double g = branch_conductance(net, b, v[b.from] - v[b.to]);
        const auto ua = unknown_of[b.from], ub = unknown_of[b.to];
        if (ua != kFixed) entries[{ua, ua}] += g;
        if (ub != kFixed) entries[{ub, ub}] += g;
        if (ua != kFixed && ub != kFixed) entries[{std::max(ua, ub), std::min(ua, ub)}] -= g;
    }
    std::vector<double> leaving(net.node_count(), 0.0);
    for (std::size_t k = 0; k < net.branches().size(); ++k) {
        leaving[net.branches()[k].from] += sol.branch_currents[k];
        leaving[net.branches()[k].to] -= sol.branch_currents[k];
    }
    os << std::setprecision(17);
    os << "%%MatrixMarket matrix coordinate real symmetric\n";
    os << "% xbar reduced nodal Jacobian at the solution (S); unknown k (1-based) maps to node_of[k]\n";
    os << "% rows " << net.rows() << " cols " << net.cols() << " nodes " << net.node_count() << " unknowns "
       << node_of.size() << " iterations " << sol.iterations << " kcl_residual " << sol.kcl_residual << "\n";
    os << node_of.size() << ' ' << node_of.size() << ' ' << entries.size() << '\n';
    for (const auto& [ij, g] : entries) os << ij.first + 1 << ' ' << ij.second + 1 << ' ' << g << '\n';
    os << "%%unknowns k node voltage_V kcl_residual_A\n";
    for (std::size_t k = 0; k < node_of.size(); ++k)
        os << k + 1 << ' ' << node_of[k] << ' ' << sol.node_voltages[node_of[k]] << ' ' << leaving[node_of[k]] << '\n';
    os << "%%fixed node voltage_V\n";
    for (std::size_t k = 0; k < net.node_count(); ++k)
        if (net.is_fixed(k)) os << k << ' ' << sol.node_voltages[k] << '\n';
}

}  // namespace xbar
