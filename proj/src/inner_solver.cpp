// SPDX-License-Identifier: Apache-2.0

#include "urllc/inner_solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace urllc {

std::string_view status_name(InnerStatus s) {
    switch (s) {
        case InnerStatus::optimal: return "optimal";
        case InnerStatus::infeasible: return "infeasible";
        case InnerStatus::max_iterations: return "max_iterations";
    }
    return "?";
}

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kStallDecrement = 1e-6;
constexpr double kInteriorMargin = 1e-6;

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct SparseCol {
    std::vector<int> idx;
    std::vector<double> val;
};

/// Solver for H = blockdiag(D_g) + sum_c u_c u_c^T.
class BlockLowRankSystem {
public:
    BlockLowRankSystem(const std::vector<std::vector<int>>& group_vars, const std::vector<int>& pos,
                       const std::vector<int>& group, int n)
        : group_vars_(group_vars), pos_(pos), group_(group), n_(n) {
        blocks_.resize(group_vars.size());
        for (std::size_t g = 0; g < group_vars.size(); ++g) {
            const auto sz = static_cast<Eigen::Index>(group_vars[g].size());
            blocks_[g].setZero(sz, sz);
        }
    }

    void reset() {
        for (auto& b : blocks_) b.setZero();
        cols_.clear();
    }

    void add_diag(int v, double a) { blocks_[group_[v]](pos_[v], pos_[v]) += a; }

    /// w * a a^T where all of a lies in one group.
    void add_local_outer(const std::vector<std::pair<int, double>>& a, double w) {
        const int g = group_[a.front().first];
        auto& b = blocks_[g];
        for (const auto& [vi, ci] : a) {
            for (const auto& [vj, cj] : a) b(pos_[vi], pos_[vj]) += w * ci * cj;
        }
    }

    void add_column(SparseCol c) { cols_.push_back(std::move(c)); }

    void factor() {
        factors_.resize(blocks_.size());
        for (std::size_t g = 0; g < blocks_.size(); ++g) {
            Mat b = blocks_[g];
            double reg = 0.0;
            const double scale = std::max(1.0, b.diagonal().cwiseAbs().maxCoeff());
            for (int attempt = 0; attempt < 12; ++attempt) {
                factors_[g].compute(b);
                if (factors_[g].info() == Eigen::Success) break;
                reg = reg == 0.0 ? 1e-10 * scale : reg * 100.0;
                b = blocks_[g];
                b.diagonal().array() += reg;
            }
        }
        const auto r = static_cast<Eigen::Index>(cols_.size());
        z_.setZero(n_, r);
        for (Eigen::Index c = 0; c < r; ++c) {
            Vec dense = Vec::Zero(n_);
            scatter(cols_[c], dense);
            z_.col(c) = apply_dinv(dense);
        }
        Mat cap = Mat::Identity(r, r);
        for (Eigen::Index i = 0; i < r; ++i) {
            for (Eigen::Index j = 0; j < r; ++j) cap(i, j) += dot(cols_[i], z_.col(j));
        }
        cap_.compute(cap);
    }

    Vec multiply(const Vec& x) const {
        Vec y = Vec::Zero(n_);
        for (std::size_t g = 0; g < blocks_.size(); ++g) {
            const auto& vars = group_vars_[g];
            Vec xg(static_cast<Eigen::Index>(vars.size()));
            for (std::size_t i = 0; i < vars.size(); ++i) xg[i] = x[vars[i]];
            Vec yg = blocks_[g] * xg;
            for (std::size_t i = 0; i < vars.size(); ++i) y[vars[i]] += yg[i];
        }
        for (const auto& c : cols_) {
            const double d = dot(c, x);
            for (std::size_t i = 0; i < c.idx.size(); ++i) y[c.idx[i]] += d * c.val[i];
        }
        return y;
    }

    Vec solve(const Vec& rhs) const {
        Vec x = solve_once(rhs);
        const Vec res = rhs - multiply(x);
        x += solve_once(res);
        return x;
    }

private:
    static void scatter(const SparseCol& c, Vec& out) {
        for (std::size_t i = 0; i < c.idx.size(); ++i) out[c.idx[i]] += c.val[i];
    }
    static double dot(const SparseCol& c, const Vec& x) {
        double s = 0.0;
        for (std::size_t i = 0; i < c.idx.size(); ++i) s += c.val[i] * x[c.idx[i]];
        return s;
    }

    Vec apply_dinv(const Vec& rhs) const {
        Vec out(n_);
        for (std::size_t g = 0; g < blocks_.size(); ++g) {
            const auto& vars = group_vars_[g];
            Vec rg(static_cast<Eigen::Index>(vars.size()));
            for (std::size_t i = 0; i < vars.size(); ++i) rg[i] = rhs[vars[i]];
            const Vec sg = factors_[g].solve(rg);
            for (std::size_t i = 0; i < vars.size(); ++i) out[vars[i]] = sg[i];
        }
        return out;
    }

    Vec solve_once(const Vec& rhs) const {
        Vec y = apply_dinv(rhs);
        if (cols_.empty()) return y;
        Vec uty(static_cast<Eigen::Index>(cols_.size()));
        for (std::size_t c = 0; c < cols_.size(); ++c) uty[c] = dot(cols_[c], y);
        return y - z_ * cap_.solve(uty);
    }

    const std::vector<std::vector<int>>& group_vars_;
    const std::vector<int>& pos_;
    const std::vector<int>& group_;
    int n_;
    std::vector<Mat> blocks_;
    std::vector<Eigen::LLT<Mat>> factors_;
    std::vector<SparseCol> cols_;
    Mat z_;
    Eigen::LDLT<Mat> cap_;
};

enum class Phase { feasibility, optimality };

class BarrierMethod {
public:
    BarrierMethod(const ConvexSubproblem& sub, const InnerConfig& cfg)
        : sub_(sub), cfg_(cfg), n_(sub.num_vars()) {
        group_vars_.resize(static_cast<std::size_t>(sub.num_groups));
        pos_.resize(static_cast<std::size_t>(n_));
        for (int v = 0; v < n_; ++v) {
            auto& gv = group_vars_[sub.group[v]];
            pos_[v] = static_cast<int>(gv.size());
            gv.push_back(v);
        }
        row_group_.resize(sub.rows.size());
        for (std::size_t j = 0; j < sub.rows.size(); ++j) {
            const auto& terms = sub.rows[j].terms;
            int g = terms.empty() ? -1 : sub.group[terms.front().var];
            for (const auto& t : terms) {
                if (sub.group[t.var] != g) {
                    g = -1;
                    break;
                }
            }
            row_group_[j] = g;
        }
        m_ = static_cast<double>(sub.num_inequalities());
    }

    InnerSolution run(std::span<const double> start) {
        InnerSolution out;
        x_ = Vec::Zero(n_);
        if (!start.empty()) {
            if (static_cast<int>(start.size()) != n_) {
                throw std::invalid_argument("inner solve: start point has wrong size");
            }
            for (int i = 0; i < n_; ++i) x_[i] = start[i];
        }
        if (!in_domain(x_, 0.0)) x_.setZero();

        const double viol = violation(x_);
        // A start hugging the boundary gives a useless barrier; recenter it.
        if (!(viol < -kInteriorMargin)) {
            out.phase1_used = true;
            const auto ph1 = phase_one(viol);
            out.phase1_bound = ph1.bound;
            out.newton_steps = steps_;
            if (ph1.status != InnerStatus::optimal) {
                out.status = ph1.status;
                fill_point(out);
                return out;
            }
        }

        t_ = cfg_.t0;
        sigma_ = 0.0;
        bool centered = true;
        while (true) {
            centered = center(Phase::optimality);
            if (!centered) break;
            const double scale = std::max(1.0, std::abs(sub_.objective(std::span<const double>(x_.data(), x_.size()))));
            if (m_ / t_ < cfg_.gap_tol * scale) break;
            t_ *= cfg_.mu;
        }
        out.status = centered ? InnerStatus::optimal : InnerStatus::max_iterations;
        out.newton_steps = steps_;
        fill_point(out);
        out.duality_gap = m_ / t_;
        out.dual_bound = out.objective_value - out.duality_gap;
        out.kkt_residual = lagrangian_residual();
        return out;
    }

private:
    struct PhaseOneResult {
        InnerStatus status;
        double bound;
    };

    void fill_point(InnerSolution& out) const {
        out.point.assign(x_.data(), x_.data() + n_);
        out.objective_value = sub_.objective(out.point);
        out.max_violation = sub_.max_violation(out.point);
    }

    // Max over rows of (lhs - bound); negative means strictly feasible.
    double violation(const Vec& x) const {
        double worst = -kInf;
        for (const auto& r : sub_.rows) {
            double lhs = 0.0;
            for (const auto& t : r.terms) lhs += t.coeff * x[t.var];
            worst = std::max(worst, lhs - r.bound);
        }
        for (const auto& r : sub_.concave_rows) worst = std::max(worst, -concave(r, x));
        return worst;
    }

    double concave(const ConcaveRow& r, const Vec& x) const {
        double v = r.constant - r.rhs;
        for (const auto& t : r.logs) v += t.weight * std::log2(1.0 + t.gain * x[t.var]);
        for (const auto& t : r.linear) v += t.coeff * x[t.var];
        return v;
    }

    bool in_domain(const Vec& x, double) const {
        for (const auto& t : sub_.objective_logs) {
            if (!(1.0 + t.gain * x[t.var] > 0.0)) return false;
        }
        for (const auto& r : sub_.concave_rows) {
            for (const auto& t : r.logs) {
                if (!(1.0 + t.gain * x[t.var] > 0.0)) return false;
            }
        }
        return true;
    }

    PhaseOneResult phase_one(double initial_violation) {
        sigma_ = std::max(initial_violation, 0.0) + 1.0;
        t_ = std::max(cfg_.t0, m_ / sigma_);
        while (true) {
            const auto outcome = center(Phase::feasibility);
            if (sigma_ < 0.0) return {InnerStatus::optimal, sigma_ - m_ / t_};
            if (!outcome) return {InnerStatus::max_iterations, sigma_ - m_ / t_};
            const double bound = sigma_ - m_ / t_;
            if (bound > cfg_.infeasibility_tol) return {InnerStatus::infeasible, bound};
            if (m_ / t_ < 1e-3 * cfg_.infeasibility_tol) {
                return {InnerStatus::infeasible, bound};
            }
            t_ *= cfg_.mu;
        }
    }

    /// Newton centering at the current t. Returns false when the step budget
    /// is exhausted. In the feasibility phase it also returns as soon as the
    /// shared slack turns negative.
    bool center(Phase phase) {
        const int np = phase == Phase::feasibility ? n_ + 1 : n_;
        BlockLowRankSystem sys(group_vars_, pos_, sub_.group, n_);
        double prev_dec2 = kInf;
        while (true) {
            if (steps_ >= cfg_.max_newton_steps) return false;
            Vec grad(np);
            Vec hxs;  // H_{x,sigma}
            double hss = 0.0;
            assemble(phase, sys, grad, hxs, hss);
            sys.factor();

            Vec dir(np);
            if (phase == Phase::optimality) {
                dir = sys.solve(-grad);
            } else {
                const Vec gx = grad.head(n_);
                const Vec a = sys.solve(-gx);
                const Vec b = sys.solve(hxs);
                const double schur = hss - hxs.dot(b);
                const double ds = (-grad[n_] - hxs.dot(a)) / schur;
                dir.head(n_) = a - b * ds;
                dir[n_] = ds;
            }
            const double dec2 = -grad.dot(dir);
            ++steps_;
            if (cfg_.trace) {
                *cfg_.trace << (phase == Phase::feasibility ? "phase1" : "phase2") << ' ' << steps_
                            << " t=" << t_ << " decrement=" << std::sqrt(std::max(dec2, 0.0))
                            << " objective="
                            << (phase == Phase::feasibility ? sigma_
                                                            : sub_.objective(std::span<const double>(
                                                                  x_.data(), x_.size())))
                            << '\n';
            }
            if (!(dec2 >= 0.0) || dec2 / 2.0 <= cfg_.newton_tol) return true;
            // Quadratic convergence has stalled at the rounding floor.
            if (dec2 / 2.0 <= kStallDecrement && dec2 > 0.25 * prev_dec2) return true;
            prev_dec2 = dec2;

            const double alpha = line_search(phase, dir, grad.dot(dir));
            if (alpha <= 0.0) return true;  // no progress possible at this precision
            x_ += alpha * dir.head(n_);
            if (phase == Phase::feasibility) {
                sigma_ += alpha * dir[n_];
                if (sigma_ < 0.0) return true;
            }
        }
    }

    void assemble(Phase phase, BlockLowRankSystem& sys, Vec& grad, Vec& hxs, double& hss) {
        sys.reset();
        const bool ph1 = phase == Phase::feasibility;
        const double shift = ph1 ? sigma_ : 0.0;
        grad.setZero();
        if (ph1) hxs = Vec::Zero(n_);
        hss = 0.0;

        if (!ph1) {
            for (const auto& t : sub_.objective_logs) {
                const double u = 1.0 + t.gain * x_[t.var];
                grad[t.var] -= t_ * t.weight * t.gain / (u * kLn2);
                sys.add_diag(t.var, t_ * t.weight * t.gain * t.gain / (u * u * kLn2));
            }
            for (int i = 0; i < n_; ++i) grad[i] += t_ * sub_.objective_linear[i];
        } else {
            grad[n_] = t_;
        }

        std::vector<std::pair<int, double>> local;
        for (std::size_t j = 0; j < sub_.rows.size(); ++j) {
            const auto& row = sub_.rows[j];
            double lhs = 0.0;
            for (const auto& t : row.terms) lhs += t.coeff * x_[t.var];
            const double r = row.bound - lhs + shift;
            const double inv = 1.0 / r;
            for (const auto& t : row.terms) grad[t.var] += t.coeff * inv;
            if (row_group_[j] >= 0) {
                local.clear();
                for (const auto& t : row.terms) local.emplace_back(t.var, t.coeff);
                sys.add_local_outer(local, inv * inv);
            } else {
                SparseCol c;
                for (const auto& t : row.terms) {
                    c.idx.push_back(t.var);
                    c.val.push_back(t.coeff * inv);
                }
                sys.add_column(std::move(c));
            }
            if (ph1) {
                grad[n_] -= inv;
                for (const auto& t : row.terms) hxs[t.var] -= t.coeff * inv * inv;
                hss += inv * inv;
            }
        }

        for (const auto& row : sub_.concave_rows) {
            const double f = concave(row, x_) + shift;
            const double inv = 1.0 / f;
            SparseCol c;
            for (const auto& t : row.logs) {
                const double u = 1.0 + t.gain * x_[t.var];
                const double d1 = t.weight * t.gain / (u * kLn2);
                grad[t.var] -= d1 * inv;
                // -f''/f with f'' = -w g^2 / (u^2 ln2)
                sys.add_diag(t.var, t.weight * t.gain * t.gain / (u * u * kLn2) * inv);
                c.idx.push_back(t.var);
                c.val.push_back(d1 * inv);
                if (ph1) hxs[t.var] += d1 * inv * inv;
            }
            for (const auto& t : row.linear) {
                grad[t.var] -= t.coeff * inv;
                c.idx.push_back(t.var);
                c.val.push_back(t.coeff * inv);
                if (ph1) hxs[t.var] += t.coeff * inv * inv;
            }
            if (!c.idx.empty()) sys.add_column(std::move(c));
            if (ph1) {
                grad[n_] -= inv;
                hss += inv * inv;
            }
        }
    }

    /// Backtracking line search on the barrier function with exact
    /// fraction-to-boundary for linear rows; differences of the barrier
    /// function are accumulated term by term to stay accurate at large t.
    double line_search(Phase phase, const Vec& dir, double slope) {
        const bool ph1 = phase == Phase::feasibility;
        const double shift = ph1 ? sigma_ : 0.0;
        const double dsig = ph1 ? dir[n_] : 0.0;

        std::vector<double> slack(sub_.rows.size()), dslack(sub_.rows.size());
        double alpha = 1.0;
        for (std::size_t j = 0; j < sub_.rows.size(); ++j) {
            const auto& row = sub_.rows[j];
            double lhs = 0.0, dl = 0.0;
            for (const auto& t : row.terms) {
                lhs += t.coeff * x_[t.var];
                dl += t.coeff * dir[t.var];
            }
            slack[j] = row.bound - lhs + shift;
            dslack[j] = dsig - dl;
            if (dslack[j] < 0.0) alpha = std::min(alpha, 0.99 * slack[j] / -dslack[j]);
        }
        std::vector<double> fval(sub_.concave_rows.size());
        for (std::size_t k = 0; k < fval.size(); ++k) {
            fval[k] = concave(sub_.concave_rows[k], x_) + shift;
        }

        for (int it = 0; it < 60; ++it, alpha *= 0.5) {
            bool ok = true;
            double delta = 0.0;
            // domain of the log terms
            auto log_ratio = [&](const LogTerm& t) {
                const double u = 1.0 + t.gain * x_[t.var];
                const double du = t.gain * alpha * dir[t.var];
                if (!(u + du > 0.0)) ok = false;
                return std::log1p(du / u) / kLn2;
            };
            if (!ph1) {
                for (const auto& t : sub_.objective_logs) delta -= t_ * t.weight * log_ratio(t);
                for (int i = 0; i < n_; ++i) delta += t_ * alpha * sub_.objective_linear[i] * dir[i];
            } else {
                delta += t_ * alpha * dsig;
            }
            if (!ok) continue;
            for (std::size_t j = 0; j < slack.size(); ++j) {
                const double rel = alpha * dslack[j] / slack[j];
                if (!(rel > -1.0)) {
                    ok = false;
                    break;
                }
                delta -= std::log1p(rel);
            }
            if (!ok) continue;
            for (std::size_t k = 0; k < fval.size(); ++k) {
                const auto& row = sub_.concave_rows[k];
                double df = alpha * dsig;
                for (const auto& t : row.logs) df += t.weight * log_ratio(t);
                for (const auto& t : row.linear) df += t.coeff * alpha * dir[t.var];
                const double rel = df / fval[k];
                if (!ok || !(rel > -1.0)) {
                    ok = false;
                    break;
                }
                delta -= std::log1p(rel);
            }
            if (!ok) continue;
            if (delta <= 0.25 * alpha * slope) return alpha;
        }
        return 0.0;
    }

    double lagrangian_residual() const {
        // grad f0 + sum lambda_j a_j - sum mu_k grad f_k with lambda = 1/(t r), mu = 1/(t f)
        Vec g = Vec::Zero(n_);
        for (const auto& t : sub_.objective_logs) {
            const double u = 1.0 + t.gain * x_[t.var];
            g[t.var] -= t.weight * t.gain / (u * kLn2);
        }
        for (int i = 0; i < n_; ++i) g[i] += sub_.objective_linear[i];
        for (const auto& row : sub_.rows) {
            double lhs = 0.0;
            for (const auto& t : row.terms) lhs += t.coeff * x_[t.var];
            const double lam = 1.0 / (t_ * (row.bound - lhs));
            for (const auto& t : row.terms) g[t.var] += lam * t.coeff;
        }
        for (const auto& row : sub_.concave_rows) {
            const double mu = 1.0 / (t_ * concave(row, x_));
            for (const auto& t : row.logs) {
                const double u = 1.0 + t.gain * x_[t.var];
                g[t.var] -= mu * t.weight * t.gain / (u * kLn2);
            }
            for (const auto& t : row.linear) g[t.var] -= mu * t.coeff;
        }
        return n_ == 0 ? 0.0 : g.cwiseAbs().maxCoeff();
    }

    const ConvexSubproblem& sub_;
    const InnerConfig& cfg_;
    int n_;
    double m_ = 0.0;
    std::vector<std::vector<int>> group_vars_;
    std::vector<int> pos_;
    std::vector<int> row_group_;
    Vec x_;
    double sigma_ = 0.0;
    double t_ = 1.0;
    int steps_ = 0;
};

}  // namespace

InnerSolution solve(const ConvexSubproblem& sub, const InnerConfig& cfg,
                    std::span<const double> start) {
    sub.validate();
    BarrierMethod method(sub, cfg);
    return method.run(start);
}

}  // namespace urllc
