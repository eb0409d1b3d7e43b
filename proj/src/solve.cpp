#include "relplan/solve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace relplan {

namespace {

// Wrong-side pruning margin. Bounds are computed in floating point, so a
// node is discarded only when it is worse than the incumbent by more than
// this; ties are kept alive for the lexicographic tie-break.
constexpr double kObjEps = 1e-9;

double penalty_term(double d, int x_j) {
    return (std::abs(d) + (1.0 - 2.0 * x_j) * d) / 2.0;
}

/// True when a is lexicographically greater than b (first differing
/// position has a 1 in a). Ties between objective-equal selections are
/// broken toward the greater vector, i.e. toward including earlier
/// features.
bool lex_greater(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) return a[i] > b[i];
    }
    return false;
}

} // namespace

std::string to_string(PlanModel m) {
    switch (m) {
        case PlanModel::Bkp: return "bkp";
        case PlanModel::BkpPc: return "bkppc";
        case PlanModel::Dasrp: return "dasrp";
    }
    return "bkp";
}

void PlanningInstance::validate() const {
    if (!(budget >= 0.0) || !std::isfinite(budget)) {
        throw ValidationError("instance: budget must be a non-negative finite number");
    }
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw ValidationError("instance: beta must lie in [0, 1]");
    }
    influence.validate();
    if (influence.size() != size()) {
        throw ValidationError("instance: influence dimension " + std::to_string(influence.size()) +
                              " does not match catalog size " + std::to_string(catalog.size()));
    }
}

std::string PlanSolution::selection_bits() const {
    std::string s(x.size(), '0');
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i]) s[i] = '1';
    }
    return s;
}

Vector penalties(const InfluenceMatrix& influence, const std::vector<std::uint8_t>& x) {
    const Eigen::Index n = influence.size();
    if (static_cast<Eigen::Index>(x.size()) != n) {
        throw ValidationError("penalties: selection size does not match influence dimension");
    }
    Vector p = Vector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double m = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            m = std::max(m, penalty_term(influence.entries(i, j), x[static_cast<std::size_t>(j)]));
        }
        p(i) = m;
    }
    return p;
}

std::pair<double, double> overall_value(const FeatureCatalog& catalog,
                                        const InfluenceMatrix& influence,
                                        const std::vector<std::uint8_t>& x) {
    const Vector p = penalties(influence, x);
    double av = 0.0;
    double ov = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i]) {
            av += catalog[i].value;
            ov += (1.0 - p(static_cast<Eigen::Index>(i))) * catalog[i].value;
        }
    }
    return {av, ov};
}

namespace {

struct ConstraintEdge {
    int other;
    bool positive;
    bool outgoing;
};

// Depth-first branch and bound shared by the three models. Features are
// explored in value-density order; the bound is the value of the selected
// prefix plus a fractional-knapsack relaxation of the undecided suffix.
// In OV mode both parts are discounted by the penalties already implied
// by the decided features, which can only grow as more get decided.
class BranchAndBound {
public:
    BranchAndBound(const PlanningInstance& inst, bool ov_mode, const Eigen::MatrixXd* constraint_d)
        : inst_(inst),
          n_(static_cast<int>(inst.catalog.size())),
          ov_mode_(ov_mode) {
        cost_.resize(n_);
        value_.resize(n_);
        for (int i = 0; i < n_; ++i) {
            cost_[i] = inst.catalog[static_cast<std::size_t>(i)].cost;
            value_[i] = inst.catalog[static_cast<std::size_t>(i)].value;
        }
        order_.resize(n_);
        std::iota(order_.begin(), order_.end(), 0);
        std::sort(order_.begin(), order_.end(), [&](int a, int b) {
            const double da = value_[a] / (cost_[a] + 1e-9);
            const double db = value_[b] / (cost_[b] + 1e-9);
            if (da != db) return da > db;
            return a < b;
        });

        if (constraint_d != nullptr) {
            constrained_ = true;
            edges_.resize(n_);
            for (int j = 0; j < n_; ++j) {
                for (int k = 0; k < n_; ++k) {
                    if (j == k) continue;
                    const double d = (*constraint_d)(j, k);
                    if (std::abs(d) > inst.beta) {
                        edges_[j].push_back({k, d > 0.0, true});
                        edges_[k].push_back({j, d > 0.0, false});
                    }
                }
            }
        }

        x_.assign(n_, -1);
        pp_.assign(static_cast<std::size_t>(n_) + 1, std::vector<double>(n_, 0.0));
        scratch_value_.resize(n_);
        scratch_idx_.resize(n_);
    }

    PlanSolution run() {
        best_obj_ = -1.0;
        has_best_ = false;
        nodes_ = 0;
        dfs(0, 0.0, 0.0);
        PlanSolution sol;
        sol.x = best_x_;
        sol.nodes_explored = nodes_;
        return sol;
    }

private:
    void dfs(int depth, double cost_used, double sel_av) {
        ++nodes_;
        if (depth == n_) {
            consider_leaf();
            return;
        }

        // Cheap accumulated-value bound first; it dominates the OV bound.
        if (sel_av + suffix_fractional_av(depth, inst_.budget - cost_used) <
            best_obj_ - kObjEps) {
            return;
        }
        if (ov_mode_ && has_best_) {
            if (penalized_bound(depth, inst_.budget - cost_used) < best_obj_ - kObjEps) {
                return;
            }
        }

        const int f = order_[depth];
        for (int choice = 1; choice >= 0; --choice) {
            if (choice == 1 && cost_used + cost_[f] > inst_.budget) continue;
            if (constrained_ && !assignment_consistent(f, choice)) continue;
            x_[f] = choice;
            apply_penalties(depth, f, choice);
            dfs(depth + 1, cost_used + choice * cost_[f], sel_av + choice * value_[f]);
            x_[f] = -1;
        }
    }

    // Partial penalties at depth+1 extend depth's with the terms induced
    // by the new assignment. The per-depth buffers make backtracking free.
    void apply_penalties(int depth, int f, int choice) {
        if (!ov_mode_) return;
        const std::vector<double>& cur = pp_[static_cast<std::size_t>(depth)];
        std::vector<double>& next = pp_[static_cast<std::size_t>(depth) + 1];
        for (int i = 0; i < n_; ++i) {
            if (i == f) {
                next[i] = cur[i];
            } else {
                next[i] = std::max(cur[i], penalty_term(inst_.influence.entries(i, f), choice));
            }
        }
    }

    // Fractional knapsack over the undecided suffix at plain values; the
    // static order is already sorted by value density.
    double suffix_fractional_av(int depth, double rem) const {
        double bound = 0.0;
        for (int t = depth; t < n_ && rem > 0.0; ++t) {
            const int f = order_[t];
            if (value_[f] <= 0.0) continue;
            if (cost_[f] <= rem) {
                bound += value_[f];
                rem -= cost_[f];
            } else {
                bound += value_[f] * rem / cost_[f];
                rem = 0.0;
            }
        }
        return bound;
    }

    // OV bound: selected features keep at most their current discounted
    // value, and any undecided feature that ends up selected is worth at
    // most its discounted value under the penalties known so far.
    double penalized_bound(int depth, double rem) {
        const std::vector<double>& pen = pp_[static_cast<std::size_t>(depth)];
        double sel = 0.0;
        for (int i = 0; i < n_; ++i) {
            if (x_[i] == 1) sel += (1.0 - pen[i]) * value_[i];
        }
        int cnt = 0;
        for (int t = depth; t < n_; ++t) {
            const int f = order_[t];
            const double eff = (1.0 - pen[f]) * value_[f];
            if (eff <= 0.0) continue;
            scratch_value_[cnt] = eff;
            scratch_idx_[cnt] = f;
            ++cnt;
        }
        std::sort(scratch_idx_.begin(), scratch_idx_.begin() + cnt, [&](int a, int b) {
            return (1.0 - pen[a]) * value_[a] * (cost_[b] + 1e-9) >
                   (1.0 - pen[b]) * value_[b] * (cost_[a] + 1e-9);
        });
        double bound = sel;
        for (int t = 0; t < cnt && rem > 0.0; ++t) {
            const int f = scratch_idx_[t];
            const double eff = (1.0 - pen[f]) * value_[f];
            if (cost_[f] <= rem) {
                bound += eff;
                rem -= cost_[f];
            } else {
                bound += eff * rem / cost_[f];
                rem = 0.0;
            }
        }
        return bound;
    }

    bool assignment_consistent(int f, int choice) const {
        for (const ConstraintEdge& e : edges_[f]) {
            const int xo = x_[e.other];
            if (xo < 0) continue;
            if (e.outgoing) {
                if (choice == 1 && ((e.positive && xo == 0) || (!e.positive && xo == 1))) {
                    return false;
                }
            } else {
                if (xo == 1 && ((e.positive && choice == 0) || (!e.positive && choice == 1))) {
                    return false;
                }
            }
        }
        return true;
    }

    void consider_leaf() {
        double obj = 0.0;
        if (ov_mode_) {
            const std::vector<double>& pen = pp_[static_cast<std::size_t>(n_)];
            for (int i = 0; i < n_; ++i) {
                if (x_[i] == 1) obj += (1.0 - pen[i]) * value_[i];
            }
        } else {
            for (int i = 0; i < n_; ++i) {
                if (x_[i] == 1) obj += value_[i];
            }
        }
        std::vector<std::uint8_t> cand(static_cast<std::size_t>(n_));
        for (int i = 0; i < n_; ++i) cand[static_cast<std::size_t>(i)] = x_[i] == 1 ? 1 : 0;
        if (!has_best_ || obj > best_obj_ ||
            (obj == best_obj_ && lex_greater(cand, best_x_))) {
            best_obj_ = obj;
            best_x_ = std::move(cand);
            has_best_ = true;
        }
    }

    const PlanningInstance& inst_;
    int n_;
    bool ov_mode_;
    bool constrained_ = false;
    std::vector<double> cost_, value_;
    std::vector<int> order_;
    std::vector<std::vector<ConstraintEdge>> edges_;

    std::vector<int> x_;
    std::vector<std::vector<double>> pp_;
    std::vector<double> scratch_value_;
    std::vector<int> scratch_idx_;

    double best_obj_ = -1.0;
    std::vector<std::uint8_t> best_x_;
    bool has_best_ = false;
    std::uint64_t nodes_ = 0;
};

InfluenceMatrix masked_influence(const InfluenceMatrix& d, double beta, bool keep_above) {
    InfluenceMatrix out;
    out.feature_ids = d.feature_ids;
    out.entries = Eigen::MatrixXd::Zero(d.size(), d.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        for (Eigen::Index j = 0; j < d.size(); ++j) {
            if (i == j) continue;
            const bool above = std::abs(d.entries(i, j)) > beta;
            if (above == keep_above) out.entries(i, j) = d.entries(i, j);
        }
        out.entries(i, i) = 1.0;
    }
    return out;
}

PlanSolution finalize(const PlanningInstance& inst, std::vector<std::uint8_t> x,
                      std::uint64_t nodes, std::chrono::steady_clock::time_point t0) {
    PlanSolution sol;
    sol.x = std::move(x);
    sol.nodes_explored = nodes;

    const Eigen::Index n = inst.size();
    if (inst.model == PlanModel::BkpPc) {
        const InfluenceMatrix constraint_set = masked_influence(inst.influence, inst.beta, true);
        const InfluenceMatrix residual_set = masked_influence(inst.influence, inst.beta, false);
        sol.penalties = penalties(constraint_set, sol.x);
        sol.residual_penalty = penalties(residual_set, sol.x);
        double av = 0.0, ov = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (sol.x[static_cast<std::size_t>(i)]) {
                av += inst.catalog[static_cast<std::size_t>(i)].value;
                ov += (1.0 - sol.penalties(i)) * inst.catalog[static_cast<std::size_t>(i)].value;
            }
        }
        sol.av = av;
        sol.ov = ov;
        sol.adjusted_ov = overall_value(inst.catalog, inst.influence, sol.x).second;
    } else {
        sol.penalties = penalties(inst.influence, sol.x);
        const auto [av, ov] = overall_value(inst.catalog, inst.influence, sol.x);
        sol.av = av;
        sol.ov = ov;
        sol.adjusted_ov = ov;
    }
    sol.phi = Vector::Ones(n) - sol.penalties;
    double cost = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (sol.x[static_cast<std::size_t>(i)]) cost += inst.catalog[static_cast<std::size_t>(i)].cost;
    }
    sol.cost_used = cost;
    sol.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                      .count();
    return sol;
}

void require_model(const PlanningInstance& inst, PlanModel expected, const char* op) {
    if (inst.model != expected) {
        throw ValidationError(std::string(op) + ": instance model is " + to_string(inst.model) +
                              ", expected " + to_string(expected));
    }
}

} // namespace

PlanSolution solve_bkp(const PlanningInstance& instance) {
    require_model(instance, PlanModel::Bkp, "solve_bkp");
    instance.validate();
    const auto t0 = std::chrono::steady_clock::now();
    BranchAndBound bnb(instance, /*ov_mode=*/false, nullptr);
    PlanSolution raw = bnb.run();
    return finalize(instance, std::move(raw.x), raw.nodes_explored, t0);
}

PlanSolution solve_bkp_dp(const PlanningInstance& instance) {
    require_model(instance, PlanModel::Bkp, "solve_bkp_dp");
    instance.validate();
    const auto t0 = std::chrono::steady_clock::now();

    const int n = static_cast<int>(instance.catalog.size());
    std::vector<std::int64_t> c10(static_cast<std::size_t>(n));
    std::int64_t total = 0;
    for (int i = 0; i < n; ++i) {
        const double scaled = instance.catalog[static_cast<std::size_t>(i)].cost * 10.0;
        c10[static_cast<std::size_t>(i)] = std::llround(scaled);
        if (std::abs(scaled - static_cast<double>(c10[static_cast<std::size_t>(i)])) > 1e-6) {
            throw SolverGuardError("solve_bkp_dp: cost of '" +
                                   instance.catalog[static_cast<std::size_t>(i)].id +
                                   "' is not a multiple of 0.1");
        }
        total += c10[static_cast<std::size_t>(i)];
    }
    const std::int64_t w_max =
        std::min<std::int64_t>(total, static_cast<std::int64_t>(std::floor(instance.budget * 10.0 + 1e-6)));

    // Suffix table: dp(t, w) = best accumulated value using features t..n-1
    // within capacity w. Reconstruction prefers taking, which yields the
    // lexicographically greatest optimal selection.
    const std::size_t width = static_cast<std::size_t>(w_max) + 1;
    std::vector<double> dp(static_cast<std::size_t>(n + 1) * width, 0.0);
    for (int t = n - 1; t >= 0; --t) {
        const double v = instance.catalog[static_cast<std::size_t>(t)].value;
        const std::int64_t c = c10[static_cast<std::size_t>(t)];
        double* cur = dp.data() + static_cast<std::size_t>(t) * width;
        const double* nxt = dp.data() + static_cast<std::size_t>(t + 1) * width;
        for (std::int64_t w = 0; w <= w_max; ++w) {
            double best = nxt[w];
            if (c <= w) best = std::max(best, v + nxt[w - c]);
            cur[w] = best;
        }
    }

    std::vector<std::uint8_t> x(static_cast<std::size_t>(n), 0);
    std::int64_t w = w_max;
    for (int t = 0; t < n; ++t) {
        const double v = instance.catalog[static_cast<std::size_t>(t)].value;
        const std::int64_t c = c10[static_cast<std::size_t>(t)];
        const double* nxt = dp.data() + static_cast<std::size_t>(t + 1) * width;
        if (c <= w && v + nxt[w - c] >= nxt[w]) {
            x[static_cast<std::size_t>(t)] = 1;
            w -= c;
        }
    }
    PlanSolution sol = finalize(instance, std::move(x),
                                static_cast<std::uint64_t>(n + 1) * width, t0);
    return sol;
}

PlanSolution solve_bkp_pc(const PlanningInstance& instance) {
    require_model(instance, PlanModel::BkpPc, "solve_bkp_pc");
    instance.validate();
    const auto t0 = std::chrono::steady_clock::now();
    BranchAndBound bnb(instance, /*ov_mode=*/false, &instance.influence.entries);
    PlanSolution raw = bnb.run();
    return finalize(instance, std::move(raw.x), raw.nodes_explored, t0);
}

PlanSolution solve_dasrp(const PlanningInstance& instance) {
    require_model(instance, PlanModel::Dasrp, "solve_dasrp");
    instance.validate();
    const auto t0 = std::chrono::steady_clock::now();
    BranchAndBound bnb(instance, /*ov_mode=*/true, nullptr);
    PlanSolution raw = bnb.run();
    return finalize(instance, std::move(raw.x), raw.nodes_explored, t0);
}

PlanSolution solve(const PlanningInstance& instance) {
    switch (instance.model) {
        case PlanModel::Bkp: return solve_bkp(instance);
        case PlanModel::BkpPc: return solve_bkp_pc(instance);
        case PlanModel::Dasrp: return solve_dasrp(instance);
    }
    throw ValidationError("solve: unknown model");
}

PlanSolution brute_force(const PlanningInstance& instance) {
    instance.validate();
    const int n = static_cast<int>(instance.catalog.size());
    if (n > 25) {
        throw SolverGuardError("brute_force: refusing n = " + std::to_string(n) +
                               " (guard is n <= 25)");
    }
    const auto t0 = std::chrono::steady_clock::now();

    struct Pair {
        int j, k;
        bool positive;
    };
    std::vector<Pair> constraints;
    if (instance.model == PlanModel::BkpPc) {
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                if (j != k && std::abs(instance.influence.entries(j, k)) > instance.beta) {
                    constraints.push_back({j, k, instance.influence.entries(j, k) > 0.0});
                }
            }
        }
    }

    const bool ov_mode = instance.model == PlanModel::Dasrp;
    std::vector<std::uint8_t> x(static_cast<std::size_t>(n));
    std::vector<std::uint8_t> best_x;
    double best_obj = 0.0;
    bool has_best = false;

    const std::uint64_t limit = std::uint64_t(1) << n;
    for (std::uint64_t mask = 0; mask < limit; ++mask) {
        double cost = 0.0;
        for (int i = 0; i < n; ++i) {
            x[static_cast<std::size_t>(i)] = (mask >> i) & 1;
            if (x[static_cast<std::size_t>(i)]) cost += instance.catalog[static_cast<std::size_t>(i)].cost;
        }
        if (cost > instance.budget) continue;
        bool ok = true;
        for (const Pair& c : constraints) {
            const int xj = x[static_cast<std::size_t>(c.j)];
            const int xk = x[static_cast<std::size_t>(c.k)];
            if (c.positive ? (xj > xk) : (xj == 1 && xk == 1)) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;

        double obj;
        if (ov_mode) {
            obj = overall_value(instance.catalog, instance.influence, x).second;
        } else {
            obj = 0.0;
            for (int i = 0; i < n; ++i) {
                if (x[static_cast<std::size_t>(i)]) obj += instance.catalog[static_cast<std::size_t>(i)].value;
            }
        }
        if (!has_best || obj > best_obj || (obj == best_obj && lex_greater(x, best_x))) {
            best_obj = obj;
            best_x = x;
            has_best = true;
        }
    }

    return finalize(instance, std::move(best_x), limit, t0);
}

} // namespace relplan
