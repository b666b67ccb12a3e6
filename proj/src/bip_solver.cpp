#include <algorithm>
#include <chrono>
#include <cstdint>
#include <deque>

#include "setplan/bip.hpp"
#include "setplan/error.hpp"

namespace setplan::bip {

namespace {

constexpr std::uint8_t kUnfixed = 2;

// One <=-row with integer coefficients (rationals scaled out).
struct Row {
    std::vector<std::pair<int, std::int64_t>> terms;  // sorted by |coeff| desc
    std::int64_t rhs = 0;
    std::int64_t lmin = 0;  // minimum achievable LHS under current fixings
};

std::int64_t to_int64_checked(Rational::Int v, const char* what) {
    if (v > static_cast<Rational::Int>(INT64_MAX) || v < static_cast<Rational::Int>(INT64_MIN))
        throw Error(ErrorKind::Model, std::string("constraint scaling overflow: ") + what);
    return static_cast<std::int64_t>(v);
}

class BranchAndBound {
public:
    BranchAndBound(const BinaryProgram& program, const SolveLimits& limits)
        : program_(program), limits_(limits) {
        build_rows();
        build_order();
        values_.assign(static_cast<std::size_t>(program.num_vars()), kUnfixed);
        optimistic_ = program.objective_constant();
        for (const auto& c : program.objective()) {
            if (c.is_positive()) optimistic_ += c;
        }
    }

    Assignment run() {
        start_ = std::chrono::steady_clock::now();
        if (!initial_propagate()) {
            Assignment a;
            a.status = SolveStatus::Infeasible;
            a.proven = true;
            a.nodes = nodes_;
            return a;
        }
        dfs(0);

        Assignment a;
        a.nodes = nodes_;
        a.incumbent_trace = incumbent_trace_;
        if (has_incumbent_) {
            a.status = exhausted_ ? SolveStatus::Feasible : SolveStatus::Optimal;
            a.proven = !exhausted_;
            a.values = incumbent_;
            a.objective = incumbent_obj_;
            if (!program_.satisfies(a.values))
                throw Error(ErrorKind::Internal, "solver produced infeasible assignment");
        } else {
            a.status = exhausted_ ? SolveStatus::NoSolution : SolveStatus::Infeasible;
            a.proven = !exhausted_;
        }
        return a;
    }

private:
    void build_rows() {
        for (const auto& c : program_.constraints()) {
            switch (c.relation) {
                case Relation::LessEq:
                    add_row(c, 1);
                    break;
                case Relation::GreaterEq:
                    add_row(c, -1);
                    break;
                case Relation::Equal:
                    add_row(c, 1);
                    add_row(c, -1);
                    break;
            }
        }
        occurrences_.assign(static_cast<std::size_t>(program_.num_vars()), {});
        for (std::size_t ri = 0; ri < rows_.size(); ++ri) {
            for (const auto& [var, coeff] : rows_[ri].terms)
                occurrences_[static_cast<std::size_t>(var)].push_back(
                    {static_cast<int>(ri), coeff});
        }
    }

    // Scales a constraint row to integers: multiply by sign and by the lcm
    // of all denominators.
    void add_row(const Constraint& c, int sign) {
        Rational::Int lcm = 1;
        auto fold = [&](const Rational& r) {
            Rational::Int d = r.den();
            Rational::Int g = gcd(lcm, d);
            Rational::Int q = d / g;
            if (__builtin_mul_overflow(lcm, q, &lcm))
                throw Error(ErrorKind::Model, "constraint denominators overflow");
        };
        for (const auto& t : c.terms) fold(t.coeff);
        fold(c.rhs);

        Row row;
        Rational::Int abs_sum = 0;
        for (const auto& t : c.terms) {
            Rational scaled = t.coeff * Rational::from_int128(sign * lcm, 1);
            std::int64_t v = to_int64_checked(scaled.num(), c.name.c_str());
            if (v == 0) continue;
            row.terms.push_back({t.var, v});
            abs_sum += v < 0 ? -static_cast<Rational::Int>(v) : static_cast<Rational::Int>(v);
            if (v < 0) row.lmin += v;
        }
        to_int64_checked(abs_sum, c.name.c_str());
        Rational rhs = c.rhs * Rational::from_int128(sign * lcm, 1);
        row.rhs = to_int64_checked(rhs.num(), c.name.c_str());
        std::sort(row.terms.begin(), row.terms.end(), [](const auto& a, const auto& b) {
            std::int64_t aa = a.second < 0 ? -a.second : a.second;
            std::int64_t bb = b.second < 0 ? -b.second : b.second;
            if (aa != bb) return aa > bb;
            return a.first < b.first;
        });
        rows_.push_back(std::move(row));
    }

    void build_order() {
        const int n = program_.num_vars();
        order_.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) order_[static_cast<std::size_t>(i)] = i;
        std::vector<int> occ(static_cast<std::size_t>(n), 0);
        for (const auto& row : rows_) {
            for (const auto& [var, coeff] : row.terms) occ[static_cast<std::size_t>(var)]++;
        }
        const auto& obj = program_.objective();
        auto abs_obj = [&](int v) {
            const Rational& r = obj[static_cast<std::size_t>(v)];
            return r.is_negative() ? -r : r;
        };
        std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) {
            if (occ[static_cast<std::size_t>(a)] != occ[static_cast<std::size_t>(b)])
                return occ[static_cast<std::size_t>(a)] > occ[static_cast<std::size_t>(b)];
            Rational ra = abs_obj(a), rb = abs_obj(b);
            if (ra != rb) return ra > rb;
            return a < b;
        });
    }

    static Rational::Int gcd(Rational::Int a, Rational::Int b) {
        if (a < 0) a = -a;
        if (b < 0) b = -b;
        while (b) {
            Rational::Int t = a % b;
            a = b;
            b = t;
        }
        return a;
    }

    // Fixes var=value, updating every row bound; returns false on
    // conflict. All rows are updated either way so unfix stays symmetric.
    bool fix(int var, std::uint8_t value) {
        values_[static_cast<std::size_t>(var)] = value;
        trail_.push_back(var);
        const Rational& c = program_.objective()[static_cast<std::size_t>(var)];
        if (c.is_positive()) {
            if (!value) optimistic_ -= c;
        } else if (value) {
            optimistic_ += c;
        }
        bool ok = true;
        for (const auto& [ri, coeff] : occurrences_[static_cast<std::size_t>(var)]) {
            Row& row = rows_[static_cast<std::size_t>(ri)];
            std::int64_t delta = (value ? coeff : 0) - std::min<std::int64_t>(coeff, 0);
            if (delta != 0) {
                row.lmin += delta;
                if (row.lmin > row.rhs) ok = false;
                if (delta > 0) queue_.push_back(ri);
            }
        }
        return ok;
    }

    void unfix(int var) {
        std::uint8_t value = values_[static_cast<std::size_t>(var)];
        values_[static_cast<std::size_t>(var)] = kUnfixed;
        const Rational& c = program_.objective()[static_cast<std::size_t>(var)];
        if (c.is_positive()) {
            if (!value) optimistic_ += c;
        } else if (value) {
            optimistic_ -= c;
        }
        for (const auto& [ri, coeff] : occurrences_[static_cast<std::size_t>(var)]) {
            Row& row = rows_[static_cast<std::size_t>(ri)];
            row.lmin -= (value ? coeff : 0) - std::min<std::int64_t>(coeff, 0);
        }
    }

    // Runs forcing to fixpoint over queued rows; on conflict leaves the
    // trail for the caller to unwind.
    bool propagate() {
        while (!queue_.empty()) {
            int ri = queue_.front();
            queue_.pop_front();
            Row& row = rows_[static_cast<std::size_t>(ri)];
            std::int64_t slack = row.rhs - row.lmin;
            if (slack < 0) {
                queue_.clear();
                return false;
            }
            for (const auto& [var, coeff] : row.terms) {
                std::int64_t mag = coeff < 0 ? -coeff : coeff;
                if (mag <= slack) break;  // terms sorted by |coeff| desc
                if (values_[static_cast<std::size_t>(var)] != kUnfixed) continue;
                // Assigning the max-contribution value would overflow the
                // row, so the min-contribution value is forced.
                std::uint8_t forced = coeff > 0 ? 0 : 1;
                if (!fix(var, forced)) {
                    queue_.clear();
                    return false;
                }
                slack = row.rhs - row.lmin;
                if (slack < 0) {
                    queue_.clear();
                    return false;
                }
            }
        }
        return true;
    }

    bool initial_propagate() {
        for (std::size_t ri = 0; ri < rows_.size(); ++ri) queue_.push_back(static_cast<int>(ri));
        return propagate();
    }

    void undo_to(std::size_t mark) {
        while (trail_.size() > mark) {
            unfix(trail_.back());
            trail_.pop_back();
        }
    }

    bool out_of_budget() {
        if (nodes_ >= limits_.max_nodes) return true;
        if (limits_.time_limit_ms > 0 && (nodes_ & 1023) == 0) {
            auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::steady_clock::now() - start_)
                               .count();
            if (elapsed >= limits_.time_limit_ms) return true;
        }
        return false;
    }

    int next_free(std::size_t from) const {
        for (std::size_t i = from; i < order_.size(); ++i) {
            if (values_[static_cast<std::size_t>(order_[i])] == kUnfixed)
                return static_cast<int>(i);
        }
        return -1;
    }

    void dfs(std::size_t order_pos) {
        ++nodes_;
        if (exhausted_ || out_of_budget()) {
            exhausted_ = true;
            return;
        }
        if (has_incumbent_ && optimistic_ <= incumbent_obj_) return;

        int pos = next_free(order_pos);
        if (pos < 0) {
            // Full assignment; propagation kept every row within bounds.
            Rational obj = program_.objective_value(values_);
            if (!has_incumbent_ || obj > incumbent_obj_) {
                has_incumbent_ = true;
                incumbent_obj_ = obj;
                incumbent_ = values_;
                incumbent_trace_.push_back(obj);
            }
            return;
        }
        int var = order_[static_cast<std::size_t>(pos)];
        const Rational& c = program_.objective()[static_cast<std::size_t>(var)];
        std::uint8_t preferred = c.is_negative() ? 0 : 1;
        for (int attempt = 0; attempt < 2; ++attempt) {
            std::uint8_t value = attempt == 0 ? preferred : static_cast<std::uint8_t>(1 - preferred);
            std::size_t mark = trail_.size();
            bool ok = fix(var, value);
            if (!ok) queue_.clear();
            if (ok && propagate()) dfs(static_cast<std::size_t>(pos) + 1);
            undo_to(mark);
            if (exhausted_) return;
        }
    }

    const BinaryProgram& program_;
    SolveLimits limits_;

    std::vector<Row> rows_;
    std::vector<std::vector<std::pair<int, std::int64_t>>> occurrences_;
    std::vector<int> order_;
    std::vector<std::uint8_t> values_;
    std::vector<int> trail_;
    std::deque<int> queue_;

    Rational optimistic_;
    bool has_incumbent_ = false;
    Rational incumbent_obj_;
    std::vector<std::uint8_t> incumbent_;
    std::vector<Rational> incumbent_trace_;

    std::uint64_t nodes_ = 0;
    bool exhausted_ = false;
    std::chrono::steady_clock::time_point start_;
};

}  // namespace

Assignment solve_exact(const BinaryProgram& program, const SolveLimits& limits) {
    BranchAndBound solver(program, limits);
    return solver.run();
}

}  // namespace setplan::bip
