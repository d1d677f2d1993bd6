// Dense reference path. Shares nothing with the sparse solver beyond the
// Network description and the device equations.

#include <cmath>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "xbar/error.hpp"
#include "xbar/solver.hpp"

namespace xbar {

namespace {

class DenseMatrix {
public:
    explicit DenseMatrix(std::size_t n) : n_(n), a_(n * n, 0.0) {}
    double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
    std::size_t size() const { return n_; }

private:
    std::size_t n_;
    std::vector<double> a_;
};

// Gaussian elimination with partial pivoting; destroys `a`.
std::vector<double> eliminate(DenseMatrix a, std::vector<double> b) {
    const std::size_t n = a.size();
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a(i, i)));
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
        if (!(std::abs(a(p, k)) > 1e-14 * scale))
            throw SingularNetworkError("dense_reference_solve: zero pivot at unknown " + std::to_string(k), {});
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
            std::swap(b[k], b[p]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double m = a(i, k) / a(k, k);
            if (m == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) a(i, j) -= m * a(k, j);
            b[i] -= m * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t k = n; k-- > 0;) {
        double s = b[k];
        for (std::size_t j = k + 1; j < n; ++j) s -= a(k, j) * x[j];
        x[k] = s / a(k, k);
    }
    return x;
}

double current_of(const Network& net, const Branch& b, double dv) {
    if (b.kind != BranchKind::Device) return b.g * dv;
    const CellState& c = net.cell(b.row, b.col);
    return c.model == DeviceModel::Linear ? dv / c.scale : c.scale * std::sinh(c.a * dv);
}

double slope_of(const Network& net, const Branch& b, double dv) {
    if (b.kind != BranchKind::Device) return b.g;
    const CellState& c = net.cell(b.row, b.col);
    return c.model == DeviceModel::Linear ? 1.0 / c.scale : c.scale * c.a * std::cosh(c.a * dv);
}

void require_grounded(const Network& net) {
    const std::size_t n = net.node_count();
    std::vector<std::vector<std::uint32_t>> adj(n);
    for (const auto& b : net.branches()) {
        adj[b.from].push_back(b.to);
        adj[b.to].push_back(b.from);
    }
    std::vector<std::uint8_t> seen(n, 0);
    std::queue<std::uint32_t> q;
    for (std::uint32_t k = 0; k < n; ++k)
        if (net.is_fixed(k)) {
            seen[k] = 1;
            q.push(k);
        }
    while (!q.empty()) {
        const auto k = q.front();
        q.pop();
        for (auto m : adj[k])
            if (!seen[m]) {
                seen[m] = 1;
                q.push(m);
            }
    }
    std::vector<std::uint32_t> orphan;
    for (std::uint32_t k = 0; k < n; ++k)
        if (!seen[k]) orphan.push_back(k);
    if (!orphan.empty()) {
        const std::string what = "dense_reference_solve: singular system, " + std::to_string(orphan.size()) +
                                 " nodes unreachable from any fixed node (first: " + std::to_string(orphan.front()) +
                                 ")";
        throw SingularNetworkError(what, std::move(orphan));
    }
}

}  // namespace

Solution dense_reference_solve(const Network& net, const SolverOptions& opts) {
    opts.validate();
    const std::size_t n = net.node_count();
    if (n > kDenseNodeCap)
        throw std::length_error("dense_reference_solve: " + std::to_string(n) + " nodes exceeds cap of " +
                                std::to_string(kDenseNodeCap));
    require_grounded(net);

    std::vector<std::int64_t> slot(n, -1);
    std::vector<std::size_t> free_nodes;
    std::vector<double> v(n, net.rest_voltage());
    for (std::size_t k = 0; k < n; ++k) {
        if (net.is_fixed(k)) {
            v[k] = net.fixed_voltage(k);
        } else {
            slot[k] = static_cast<std::int64_t>(free_nodes.size());
            free_nodes.push_back(k);
        }
    }
    const std::size_t nf = free_nodes.size();

    auto kcl = [&](const std::vector<double>& volts) {
        std::vector<double> f(nf, 0.0);
        for (const auto& b : net.branches()) {
            const double i = current_of(net, b, volts[b.from] - volts[b.to]);
            if (slot[b.from] >= 0) f[static_cast<std::size_t>(slot[b.from])] += i;
            if (slot[b.to] >= 0) f[static_cast<std::size_t>(slot[b.to])] -= i;
        }
        return f;
    };
    auto jacobian = [&](const std::vector<double>& volts) {
        DenseMatrix j(nf);
        for (const auto& b : net.branches()) {
            const double g = slope_of(net, b, volts[b.from] - volts[b.to]);
            const auto sa = slot[b.from], sb = slot[b.to];
            if (sa >= 0) j(static_cast<std::size_t>(sa), static_cast<std::size_t>(sa)) += g;
            if (sb >= 0) j(static_cast<std::size_t>(sb), static_cast<std::size_t>(sb)) += g;
            if (sa >= 0 && sb >= 0) {
                j(static_cast<std::size_t>(sa), static_cast<std::size_t>(sb)) -= g;
                j(static_cast<std::size_t>(sb), static_cast<std::size_t>(sa)) -= g;
            }
        }
        return j;
    };
    auto norm2 = [](const std::vector<double>& x) {
        double s = 0.0;
        for (double e : x) s += e * e;
        return std::sqrt(s);
    };
    auto norm_inf = [](const std::vector<double>& x) {
        double s = 0.0;
        for (double e : x) s = std::max(s, std::abs(e));
        return s;
    };

    int iterations = 1;
    std::vector<double> history;
    if (net.model() == DeviceModel::Linear) {
        // G v_free = -G_free,fixed v_fixed, solved directly from the zero state.
        std::vector<double> start = v;
        for (auto k : free_nodes) start[k] = 0.0;
        std::vector<double> rhs = kcl(start);
        for (double& r : rhs) r = -r;
        if (nf > 0) {
            const DenseMatrix g = jacobian(start);
            auto x = eliminate(g, rhs);
            // Iterative refinement with the unassembled residual.
            for (int p = 0; p < opts.polish_steps; ++p) {
                for (std::size_t k = 0; k < nf; ++k) v[free_nodes[k]] = x[k];
                auto r = kcl(v);
                for (double& e : r) e = -e;
                const auto dx = eliminate(g, r);
                for (std::size_t k = 0; k < nf; ++k) x[k] += dx[k];
            }
            for (std::size_t k = 0; k < nf; ++k) v[free_nodes[k]] = x[k];
        }
    } else {
        std::vector<double> f = kcl(v);
        history.push_back(norm2(f));
        std::vector<double> polish_history;
        auto newton_step = [&](std::vector<double>& hist) {
            std::vector<double> neg(f);
            for (double& e : neg) e = -e;
            const auto dx = eliminate(jacobian(v), neg);
            double step = opts.damping;
            for (int h = 0; h <= opts.max_halvings; ++h, step *= 0.5) {
                std::vector<double> trial = v;
                for (std::size_t k = 0; k < nf; ++k) trial[free_nodes[k]] += step * dx[k];
                auto ft = kcl(trial);
                const double nt = norm2(ft);
                if (std::isfinite(nt) && nt < (hist.empty() ? history.back() : hist.back())) {
                    v = std::move(trial);
                    f = std::move(ft);
                    hist.push_back(nt);
                    return true;
                }
            }
            return false;
        };
        bool converged = false;
        for (iterations = 1; iterations <= opts.max_newton_iters; ++iterations) {
            if (nf == 0 || norm_inf(f) <= opts.abs_tol) {
                converged = true;
                break;
            }
            if (iterations == opts.max_newton_iters || !newton_step(history)) break;
        }
        if (!converged)
            throw ConvergenceError("dense_reference_solve: Newton did not converge", norm_inf(f), iterations);
        for (int p = 0; p < opts.polish_steps && nf > 0; ++p)
            if (!newton_step(polish_history)) break;
    }

    Solution s;
    s.node_voltages = v;
    s.iterations = iterations;
    s.residual_history = std::move(history);
    s.branch_currents.resize(net.branches().size());
    std::vector<double> leaving(n, 0.0);
    for (std::size_t k = 0; k < net.branches().size(); ++k) {
        const auto& b = net.branches()[k];
        const double i = current_of(net, b, v[b.from] - v[b.to]);
        s.branch_currents[k] = i;
        leaving[b.from] += i;
        leaving[b.to] -= i;
    }
    for (const auto& t : net.terminals())
        s.terminal_currents.push_back(t.branch >= 0 ? s.branch_currents[static_cast<std::size_t>(t.branch)]
                                                    : leaving[t.fixed_node]);
    for (std::size_t k = 0; k < n; ++k)
        if (!net.is_fixed(k)) s.kcl_residual = std::max(s.kcl_residual, std::abs(leaving[k]));
    return s;
}

}  // namespace xbar
