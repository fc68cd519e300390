#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace hyperjsq {

enum class RowSense { LessEqual, Equal, GreaterEqual };

struct LpRow {
    std::vector<double> coeffs;  // dense, one per variable
    RowSense sense = RowSense::LessEqual;
    double rhs = 0.0;
};

/// minimize objective . x  subject to rows, x >= 0
struct LpProblem {
    std::size_t var_count = 0;
    std::vector<double> objective;
    std::vector<LpRow> rows;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
    LpStatus status = LpStatus::Optimal;
    double objective = 0.0;
    std::vector<double> x;
};

/// Dense two-phase tableau simplex. Bland's rule everywhere, so the pivot
/// sequence is deterministic and cycling cannot occur. Intended for the small
/// allocation programs this library builds (tens of rows and columns).
class SimplexSolver {
public:
    explicit SimplexSolver(double eps = 1e-9) : eps_(eps) {}

    LpSolution solve(const LpProblem& p) const {
        const std::size_t m = p.rows.size();
        const std::size_t n = p.var_count;
        if (p.objective.size() != n) {
            throw std::invalid_argument("objective size does not match var_count");
        }

        // Normalize to rhs >= 0.
        std::vector<std::vector<double>> a(m, std::vector<double>(n, 0.0));
        std::vector<double> b(m);
        std::vector<RowSense> sense(m);
        for (std::size_t i = 0; i < m; ++i) {
            if (p.rows[i].coeffs.size() != n) {
                throw std::invalid_argument("row size does not match var_count");
            }
            a[i] = p.rows[i].coeffs;
            b[i] = p.rows[i].rhs;
            sense[i] = p.rows[i].sense;
            if (b[i] < 0.0) {
                for (double& c : a[i]) c = -c;
                b[i] = -b[i];
                if (sense[i] == RowSense::LessEqual) sense[i] = RowSense::GreaterEqual;
                else if (sense[i] == RowSense::GreaterEqual) sense[i] = RowSense::LessEqual;
            }
        }

        // Column layout: structural | slack/surplus | artificial | rhs.
        std::size_t n_slack = 0, n_art = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (sense[i] != RowSense::Equal) ++n_slack;
            if (sense[i] != RowSense::LessEqual) ++n_art;
        }
        const std::size_t slack_begin = n;
        const std::size_t art_begin = n + n_slack;
        const std::size_t width = n + n_slack + n_art;

        std::vector<std::vector<double>> t(m, std::vector<double>(width + 1, 0.0));
        std::vector<std::size_t> basis(m);
        std::size_t next_slack = slack_begin, next_art = art_begin;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) t[i][j] = a[i][j];
            t[i][width] = b[i];
            switch (sense[i]) {
                case RowSense::LessEqual:
                    t[i][next_slack] = 1.0;
                    basis[i] = next_slack++;
                    break;
                case RowSense::GreaterEqual:
                    t[i][next_slack] = -1.0;
                    ++next_slack;
                    t[i][next_art] = 1.0;
                    basis[i] = next_art++;
                    break;
                case RowSense::Equal:
                    t[i][next_art] = 1.0;
                    basis[i] = next_art++;
                    break;
            }
        }

        if (n_art > 0) {
            std::vector<double> phase1(width, 0.0);
            for (std::size_t j = art_begin; j < width; ++j) phase1[j] = 1.0;
            auto [st1, z1] = run(t, basis, phase1, width);
            if (st1 == LpStatus::Unbounded) {
                throw std::logic_error("phase 1 cannot be unbounded");
            }
            if (z1 > feasibility_tol(b)) {
                return {LpStatus::Infeasible, 0.0, {}};
            }
            // Pivot artificial variables out of the basis; drop redundant rows.
            for (std::size_t i = 0; i < t.size();) {
                if (basis[i] < art_begin) {
                    ++i;
                    continue;
                }
                std::size_t enter = width;
                for (std::size_t j = 0; j < art_begin; ++j) {
                    if (std::abs(t[i][j]) > eps_) {
                        enter = j;
                        break;
                    }
                }
                if (enter == width) {
                    t.erase(t.begin() + static_cast<std::ptrdiff_t>(i));
                    basis.erase(basis.begin() + static_cast<std::ptrdiff_t>(i));
                } else {
                    pivot(t, basis, i, enter);
                    ++i;
                }
            }
        }

        std::vector<double> phase2(width, 0.0);
        for (std::size_t j = 0; j < n; ++j) phase2[j] = p.objective[j];
        auto [st2, z2] = run(t, basis, phase2, art_begin);
        if (st2 == LpStatus::Unbounded) {
            return {LpStatus::Unbounded, 0.0, {}};
        }

        LpSolution sol;
        sol.status = LpStatus::Optimal;
        sol.x.assign(n, 0.0);
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (basis[i] < n) sol.x[basis[i]] = t[i].back();
        }
        sol.objective = 0.0;
        for (std::size_t j = 0; j < n; ++j) sol.objective += p.objective[j] * sol.x[j];
        return sol;
    }

private:
    double eps_;

    double feasibility_tol(const std::vector<double>& b) const {
        double scale = 1.0;
        for (double v : b) scale = std::max(scale, std::abs(v));
        return 1e-7 * scale;
    }

    static void pivot(std::vector<std::vector<double>>& t, std::vector<std::size_t>& basis,
                      std::size_t row, std::size_t col) {
        const std::size_t w = t[row].size();
        const double piv = t[row][col];
        for (std::size_t j = 0; j < w; ++j) t[row][j] /= piv;
        t[row][col] = 1.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (i == row) continue;
            const double f = t[i][col];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < w; ++j) t[i][j] -= f * t[row][j];
            t[i][col] = 0.0;
        }
        basis[row] = col;
    }

    // Minimizes cost over the current tableau. Only columns < col_limit may
    // enter. The reduced-cost row is recomputed from scratch every iteration;
    // at these problem sizes robustness beats the wasted flops.
    std::pair<LpStatus, double> run(std::vector<std::vector<double>>& t,
                                    std::vector<std::size_t>& basis,
                                    const std::vector<double>& cost,
                                    std::size_t col_limit) const {
        const std::size_t width = cost.size();
        std::vector<double> reduced(width);
        for (std::size_t iter = 0; iter < 200000; ++iter) {
            reduced.assign(cost.begin(), cost.end());
            double z = 0.0;
            for (std::size_t i = 0; i < t.size(); ++i) {
                const double cb = cost[basis[i]];
                if (cb == 0.0) continue;
                z += cb * t[i].back();
                for (std::size_t j = 0; j < width; ++j) reduced[j] -= cb * t[i][j];
            }

            std::size_t enter = width;
            for (std::size_t j = 0; j < col_limit; ++j) {  // Bland: lowest index
                if (reduced[j] < -eps_) {
                    enter = j;
                    break;
                }
            }
            if (enter == width) return {LpStatus::Optimal, z};

            std::size_t leave = t.size();
            double best_ratio = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < t.size(); ++i) {
                if (t[i][enter] > eps_) {
                    const double ratio = t[i].back() / t[i][enter];
                    if (ratio < best_ratio - eps_ ||
                        (ratio < best_ratio + eps_ &&
                         (leave == t.size() || basis[i] < basis[leave]))) {
                        best_ratio = ratio;
                        leave = i;
                    }
                }
            }
            if (leave == t.size()) return {LpStatus::Unbounded, 0.0};
            pivot(t, basis, leave, enter);
        }
        throw std::runtime_error("simplex did not converge");
    }
};

}  // namespace hyperjsq
