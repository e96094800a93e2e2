#pragma once

// Dense two-phase tableau simplex with Bland's rule. Sized for the small
// l_inf-projection problems that back membership and distance queries
// (a few dozen variables and constraints), instantiated for double and for
// exact Rational arithmetic.

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "latticeborell/error.hpp"
#include "latticeborell/rational.hpp"

namespace latticeborell::lp {

enum class Sense { LessEqual, Equal, GreaterEqual };
enum class Status { Optimal, Infeasible, Unbounded };

template <class T>
struct ScalarTraits {
  static bool is_zero(const T& v) { return v == 0; }
  static bool is_negative(const T& v) { return v < 0; }
  static bool is_positive(const T& v) { return v > 0; }
  static bool is_pivot(const T& v) { return v > 0; }
  static bool is_noise(const T&) { return false; }
};

template <>
struct ScalarTraits<double> {
  static constexpr double kEps = 1e-11;
  static constexpr double kPivotEps = 1e-9;
  static bool is_zero(double v) { return std::abs(v) <= kEps; }
  static bool is_pivot(double v) { return v > kPivotEps; }
  // Reduced costs this small with no usable pivot are rounding residue.
  static bool is_noise(double v) { return std::abs(v) <= 1e-7; }
  static bool is_negative(double v) { return v < -kEps; }
  static bool is_positive(double v) { return v > kEps; }
};

template <class T>
struct Term {
  int var;
  T coeff;
};

/// minimize objective . x  subject to rows, with per-variable sign
/// restriction (nonnegative or free).
template <class T>
class LinearProgram {
 public:
  struct Row {
    std::vector<Term<T>> terms;
    Sense sense;
    T rhs;
  };

  int add_variable(bool nonnegative) {
    nonnegative_.push_back(nonnegative);
    objective_.emplace_back(0);
    return static_cast<int>(nonnegative_.size()) - 1;
  }

  void add_row(std::vector<Term<T>> terms, Sense sense, T rhs) {
    rows_.push_back(Row{std::move(terms), sense, std::move(rhs)});
  }

  void set_objective(int var, T coeff) { objective_.at(static_cast<std::size_t>(var)) = std::move(coeff); }

  int num_variables() const { return static_cast<int>(nonnegative_.size()); }
  const std::vector<Row>& rows() const { return rows_; }
  const std::vector<T>& objective() const { return objective_; }
  bool nonnegative(int var) const { return nonnegative_[static_cast<std::size_t>(var)]; }

 private:
  std::vector<bool> nonnegative_;
  std::vector<Row> rows_;
  std::vector<T> objective_;
};

template <class T>
struct Solution {
  Status status = Status::Infeasible;
  T objective{0};
  std::vector<T> x;
  int pivots = 0;
};

namespace detail {

template <class T>
class Tableau {
 public:
  using Traits = ScalarTraits<T>;

  Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), a_((rows + 1) * (cols + 1), T(0)), basis_(rows) {}

  T& at(std::size_t r, std::size_t c) { return a_[r * (n_ + 1) + c]; }
  const T& at(std::size_t r, std::size_t c) const { return a_[r * (n_ + 1) + c]; }
  T& rhs(std::size_t r) { return at(r, n_); }
  T& cost(std::size_t c) { return at(m_, c); }

  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }
  std::vector<std::size_t>& basis() { return basis_; }

  void pivot(std::size_t pr, std::size_t pc) {
    const T inv = T(1) / at(pr, pc);
    for (std::size_t c = 0; c <= n_; ++c) {
      if (at(pr, c) != 0) at(pr, c) *= inv;
    }
    at(pr, pc) = T(1);
    std::vector<std::size_t> nz;
    nz.reserve(n_ + 1);
    for (std::size_t c = 0; c <= n_; ++c) {
      if (at(pr, c) != 0) nz.push_back(c);
    }
    for (std::size_t r = 0; r <= m_; ++r) {
      if (r == pr) continue;
      const T factor = at(r, pc);
      if (factor == 0) continue;
      for (std::size_t c : nz) at(r, c) -= factor * at(pr, c);
      at(r, pc) = T(0);
    }
    basis_[pr] = pc;
  }

  /// Runs Bland's-rule iterations on the current cost row. Columns flagged in
  /// `banned` never enter. Returns false when unbounded.
  bool optimize(const std::vector<bool>& banned, int& pivots, int max_pivots) {
    std::vector<bool> skip = banned;
    while (true) {
      std::size_t enter = n_;
      for (std::size_t c = 0; c < n_; ++c) {
        if (!skip[c] && Traits::is_negative(cost(c))) {
          enter = c;
          break;
        }
      }
      if (enter == n_) return true;
      std::size_t leave = m_;
      T best_ratio{0};
      for (std::size_t r = 0; r < m_; ++r) {
        if (!Traits::is_pivot(at(r, enter))) continue;
        T ratio = rhs(r) / at(r, enter);
        bool take = leave == m_;
        if (!take) {
          const T gap = ratio - best_ratio;
          take = Traits::is_negative(gap) || (Traits::is_zero(gap) && basis_[r] < basis_[leave]);
        }
        if (take) {
          leave = r;
          best_ratio = std::move(ratio);
        }
      }
      if (leave == m_) {
        if (!Traits::is_noise(cost(enter))) return false;
        skip[enter] = true;
        continue;
      }
      pivot(leave, enter);
      skip = banned;
      if (++pivots > max_pivots) throw Error(ErrorKind::Unsupported, "simplex pivot limit exceeded");
    }
  }

  void remove_row(std::size_t r) {
    // Move the last constraint row into r, then shift the cost row up.
    const std::size_t last = m_ - 1;
    if (r != last) {
      for (std::size_t c = 0; c <= n_; ++c) at(r, c) = at(last, c);
      basis_[r] = basis_[last];
    }
    for (std::size_t c = 0; c <= n_; ++c) at(last, c) = at(m_, c);
    basis_.pop_back();
    --m_;
    a_.resize((m_ + 1) * (n_ + 1));
  }

 private:
  std::size_t m_;
  std::size_t n_;
  std::vector<T> a_;
  std::vector<std::size_t> basis_;
};

}  // namespace detail

template <class T>
Solution<T> solve(const LinearProgram<T>& program) {
  using Traits = ScalarTraits<T>;
  const int nvars = program.num_variables();
  const auto& rows = program.rows();
  const std::size_t m = rows.size();

  // Column layout: structural (free vars split in two), slacks, artificials.
  std::vector<std::size_t> pos_col(static_cast<std::size_t>(nvars));
  std::vector<std::ptrdiff_t> neg_col(static_cast<std::size_t>(nvars), -1);
  std::size_t ncols = 0;
  for (int j = 0; j < nvars; ++j) {
    pos_col[static_cast<std::size_t>(j)] = ncols++;
    if (!program.nonnegative(j)) neg_col[static_cast<std::size_t>(j)] = static_cast<std::ptrdiff_t>(ncols++);
  }
  std::vector<std::ptrdiff_t> slack_col(m, -1);
  for (std::size_t i = 0; i < m; ++i) {
    if (rows[i].sense != Sense::Equal) slack_col[i] = static_cast<std::ptrdiff_t>(ncols++);
  }
  const std::size_t first_artificial = ncols;
  ncols += m;

  detail::Tableau<T> tab(m, ncols);
  for (std::size_t i = 0; i < m; ++i) {
    for (const auto& term : rows[i].terms) {
      const auto j = static_cast<std::size_t>(term.var);
      tab.at(i, pos_col[j]) += term.coeff;
      if (neg_col[j] >= 0) tab.at(i, static_cast<std::size_t>(neg_col[j])) -= term.coeff;
    }
    if (slack_col[i] >= 0) {
      tab.at(i, static_cast<std::size_t>(slack_col[i])) = rows[i].sense == Sense::LessEqual ? T(1) : T(-1);
    }
    tab.rhs(i) = rows[i].rhs;
    if (tab.rhs(i) < 0) {
      for (std::size_t c = 0; c <= ncols; ++c) tab.at(i, c) = -tab.at(i, c);
    }
    tab.at(i, first_artificial + i) = T(1);
    tab.basis()[i] = first_artificial + i;
  }

  // Phase 1: minimize the sum of artificials.
  for (std::size_t c = 0; c <= ncols; ++c) {
    if (c >= first_artificial && c < ncols) continue;
    T sum{0};
    for (std::size_t i = 0; i < m; ++i) sum += tab.at(i, c);
    tab.cost(c) = -sum;
  }
  Solution<T> solution;
  const int max_pivots = 50 * static_cast<int>(m + ncols) + 1000;
  std::vector<bool> banned(ncols, false);
  if (!tab.optimize(banned, solution.pivots, max_pivots)) {
    throw Error(ErrorKind::Unsupported, "simplex phase 1 lost feasibility to rounding");
  }
  if (Traits::is_positive(T(-tab.rhs(tab.rows())))) {
    solution.status = Status::Infeasible;
    return solution;
  }

  // Drive zero-level artificials out of the basis; drop redundant rows.
  for (std::size_t r = 0; r < tab.rows();) {
    if (tab.basis()[r] < first_artificial) {
      ++r;
      continue;
    }
    std::size_t pc = first_artificial;
    for (std::size_t c = 0; c < first_artificial; ++c) {
      if (!Traits::is_zero(tab.at(r, c))) {
        pc = c;
        break;
      }
    }
    if (pc == first_artificial) {
      tab.remove_row(r);
    } else {
      tab.pivot(r, pc);
      ++r;
    }
  }
  for (std::size_t c = first_artificial; c < ncols; ++c) banned[c] = true;

  // Phase 2 cost row.
  std::vector<T> cost(ncols, T(0));
  for (int j = 0; j < nvars; ++j) {
    const auto& cj = program.objective()[static_cast<std::size_t>(j)];
    cost[pos_col[static_cast<std::size_t>(j)]] = cj;
    if (neg_col[static_cast<std::size_t>(j)] >= 0) cost[static_cast<std::size_t>(neg_col[static_cast<std::size_t>(j)])] = -cj;
  }
  for (std::size_t c = 0; c <= ncols; ++c) {
    T value = c < ncols ? cost[c] : T(0);
    for (std::size_t i = 0; i < tab.rows(); ++i) {
      const T& cb = cost[tab.basis()[i]];
      if (cb != 0) value -= cb * tab.at(i, c);
    }
    tab.cost(c) = value;
  }
  if (!tab.optimize(banned, solution.pivots, max_pivots)) {
    solution.status = Status::Unbounded;
    return solution;
  }

  std::vector<T> column_value(ncols, T(0));
  for (std::size_t i = 0; i < tab.rows(); ++i) column_value[tab.basis()[i]] = tab.rhs(i);
  solution.x.assign(static_cast<std::size_t>(nvars), T(0));
  T objective{0};
  for (int j = 0; j < nvars; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    T v = column_value[pos_col[uj]];
    if (neg_col[uj] >= 0) v -= column_value[static_cast<std::size_t>(neg_col[uj])];
    if (program.objective()[uj] != 0) objective += program.objective()[uj] * v;
    solution.x[uj] = std::move(v);
  }
  solution.objective = objective;
  solution.status = Status::Optimal;
  return solution;
}

}  // namespace latticeborell::lp
