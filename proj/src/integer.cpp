#include "aqua/integer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <queue>
#include <thread>
#include <vector>

namespace aqua {

namespace {

constexpr double kIntTol = 1e-6;        // a variable closer than this is integral
constexpr double kIncumbentFeasTol = 1e-6;

struct Node {
  std::shared_ptr<const Node> parent;
  int var = -1;  // -1 for the root
  double lo = 0.0;
  double hi = 0.0;
  double bound = std::numeric_limits<double>::infinity();
  int depth = 0;
  long id = 0;
  std::shared_ptr<const Eigen::VectorXd> warm;
};

using NodePtr = std::shared_ptr<const Node>;

void materialize_bounds(const Node* node, Eigen::VectorXd& lower,
                        Eigen::VectorXd& upper) {
  for (const Node* p = node; p != nullptr; p = p->parent.get()) {
    if (p->var >= 0) {
      lower(p->var) = std::max(lower(p->var), p->lo);
      upper(p->var) = std::min(upper(p->var), p->hi);
    }
  }
}

struct NodeOrder {
  bool operator()(const NodePtr& a, const NodePtr& b) const {
    if (a->bound != b->bound) return a->bound < b->bound;
    if (a->depth != b->depth) return a->depth < b->depth;
    return a->id < b->id;
  }
};

double fractionality(double v) { return std::abs(v - std::round(v)); }

// Shared solver state; all mutation happens under the mutex.
struct BnbShared {
  std::priority_queue<NodePtr, std::vector<NodePtr>, NodeOrder> open;
  std::optional<Design> incumbent;
  std::vector<std::pair<Design, double>> incumbent_history;
  double incumbent_phi = -std::numeric_limits<double>::infinity();
  long nodes_expanded = 0;
  long heuristic_improvements = 0;
  long next_id = 1;
  int in_flight = 0;
  std::vector<double> in_flight_bounds;
  bool stop = false;
  Termination termination = Termination::optimal;
  std::mutex mu;
  std::condition_variable cv;
};

double relative_gap(double upper, double incumbent) {
  return (upper - incumbent) / std::max(std::abs(upper), 1e-12);
}

}  // namespace

std::optional<Design> round_incumbent(const Design& relaxed, const ConstraintSet& cs) {
  const int n = cs.n();
  if (relaxed.size() != n) throw DimensionMismatch("round_incumbent: size mismatch");
  Eigen::VectorXd x = relaxed.weights;
  for (int j = 0; j < n; ++j) {
    if (!cs.integral(j)) continue;
    double v = std::floor(relaxed.weights(j) + 1e-9);
    v = std::max(v, std::ceil(cs.lower()(j) - 1e-9));
    if (std::isfinite(cs.upper()(j))) v = std::min(v, std::floor(cs.upper()(j) + 1e-9));
    x(j) = v;
  }

  const long step_cap = 4L * n + 100;
  for (long step = 0; step < step_cap; ++step) {
    // Most violated row drives the next unit repair.
    Eigen::VectorXd ax = cs.a() * x;
    int worst = -1;
    double worst_amount = 1e-8;
    bool need_increase = false;
    for (int i = 0; i < cs.rows(); ++i) {
      const double excess = ax(i) - cs.b()(i);
      if (excess > worst_amount) {
        worst = i;
        worst_amount = excess;
        need_increase = false;
      } else if (cs.row_equality(i) && -excess > worst_amount) {
        worst = i;
        worst_amount = -excess;
        need_increase = true;
      }
    }
    if (worst < 0) break;  // rows satisfied

    // A unit move on the variable whose fractional remainder points the
    // right way; decrements of over-rounded variables act symmetrically.
    int best_j = -1;
    double best_rem = -std::numeric_limits<double>::infinity();
    bool best_is_increment = true;
    for (int j = 0; j < n; ++j) {
      if (!cs.integral(j)) continue;
      const double a = cs.a()(worst, j);
      if (a == 0.0) continue;
      const bool toward = need_increase ? a > 0.0 : a < 0.0;
      if (toward && x(j) + 1.0 <= cs.upper()(j) + 1e-9) {
        const double rem = relaxed.weights(j) - x(j);
        if (rem > best_rem) {
          best_rem = rem;
          best_j = j;
          best_is_increment = true;
        }
      }
      const bool away = need_increase ? a < 0.0 : a > 0.0;
      if (away && x(j) - 1.0 >= cs.lower()(j) - 1e-9) {
        const double rem = x(j) - relaxed.weights(j);
        if (rem > best_rem) {
          best_rem = rem;
          best_j = j;
          best_is_increment = false;
        }
      }
    }
    if (best_j < 0) return std::nullopt;
    x(best_j) += best_is_increment ? 1.0 : -1.0;
  }

  Design d{x, true};
  if (!feasible(d, cs, kIncumbentFeasTol).ok) return std::nullopt;
  return d;
}

Design kl_exchange(const QuadModel& q, const ConstraintSet& cs, const Design& start,
                   const ExchangeOptions& opts) {
  if (!start.integral || !feasible(start, cs, kIncumbentFeasTol).ok) {
    throw InfeasibleStart("kl_exchange: start design infeasible or not integral");
  }
  ExchangeState st = make_exchange_state(q, start);
  Eigen::VectorXd ax = cs.a() * st.xi;
  const int n = cs.n();
  const double row_tol = 1e-8;

  auto rows_ok = [&](const Eigen::VectorXd& new_ax) {
    for (int i = 0; i < cs.rows(); ++i) {
      const double excess = new_ax(i) - cs.b()(i);
      if (cs.row_equality(i) ? std::abs(excess) > row_tol : excess > row_tol) {
        return false;
      }
    }
    return true;
  };

  std::vector<int> inc_cand, dec_cand;
  std::vector<int> order(n);
  for (long moves = 0; moves < opts.move_cap; ++moves) {
    Eigen::VectorXd g = q.h;
    if (q.rank > 0) g -= 2.0 * (q.s * st.v);

    inc_cand.clear();
    dec_cand.clear();
    for (int j = 0; j < n; ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return g(a) > g(b); });
    for (int j : order) {
      if (static_cast<int>(inc_cand.size()) >= opts.k) break;
      if (st.xi(j) + 1.0 <= cs.upper()(j) + 1e-9) inc_cand.push_back(j);
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      if (static_cast<int>(dec_cand.size()) >= opts.l) break;
      const int j = *it;
      if (st.xi(j) >= 1.0 - 1e-9 && st.xi(j) - 1.0 >= cs.lower()(j) - 1e-9) {
        dec_cand.push_back(j);
      }
    }

    const double improve_tol = 1e-10 * (1.0 + std::abs(st.phi));
    double best_gain = improve_tol;
    int best_l = -1, best_k = -1;  // best_k == -1: pure addition; best_l == -1: removal
    for (int l : inc_cand) {
      for (int k : dec_cand) {
        if (l == k) continue;
        const double gain = exchange_gain(st, l, k);
        if (gain <= best_gain) continue;
        Eigen::VectorXd new_ax = ax + cs.a().col(l) - cs.a().col(k);
        if (rows_ok(new_ax)) {
          best_gain = gain;
          best_l = l;
          best_k = k;
        }
      }
    }
    for (int l : inc_cand) {
      const double gain = addition_gain(st, l);
      if (gain <= best_gain) continue;
      Eigen::VectorXd new_ax = ax + cs.a().col(l);
      if (rows_ok(new_ax)) {
        best_gain = gain;
        best_l = l;
        best_k = -1;
      }
    }
    for (int k : dec_cand) {
      const double gain = removal_gain(st, k);
      if (gain <= best_gain) continue;
      Eigen::VectorXd new_ax = ax - cs.a().col(k);
      if (rows_ok(new_ax)) {
        best_gain = gain;
        best_l = -1;
        best_k = k;
      }
    }

    if (best_l < 0 && best_k < 0) break;  // local optimum
    if (best_l >= 0 && best_k >= 0) {
      apply_exchange(st, best_l, best_k);
      ax += cs.a().col(best_l) - cs.a().col(best_k);
    } else if (best_l >= 0) {
      apply_addition(st, best_l);
      ax += cs.a().col(best_l);
    } else {
      apply_removal(st, best_k);
      ax -= cs.a().col(best_k);
    }
    if (opts.phi_trace) opts.phi_trace->push_back(st.phi);
  }
  return Design{st.xi, true};
}

SolveReport branch_and_bound(const QuadModel& q, const ConstraintSet& cs,
                             const BnbOptions& opts) {
  if (q.n() != cs.n()) throw DimensionMismatch("branch_and_bound: n mismatch");
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  BnbShared sh;
  const int workers = std::max(1, opts.threads);
  sh.in_flight_bounds.assign(workers, -std::numeric_limits<double>::infinity());
  {
    auto root = std::make_shared<Node>();
    root->bound = std::numeric_limits<double>::infinity();
    sh.open.push(root);
  }

  ExchangeOptions ex_opts;
  ex_opts.k = opts.exchange_k;
  ex_opts.l = opts.exchange_l;

  auto try_incumbent = [&](const Design& cand) {
    // Caller holds no lock; evaluates then swaps in under the lock.
    if (!feasible(cand, cs, kIncumbentFeasTol).ok) return;
    Design improved = cand;
    double val = phi_quad(q, improved);
    {
      std::lock_guard<std::mutex> lk(sh.mu);
      if (val <= sh.incumbent_phi) return;
    }
    try {
      Design ex = kl_exchange(q, cs, improved, ex_opts);
      const double ex_val = phi_quad(q, ex);
      if (ex_val > val) {
        improved = std::move(ex);
        val = ex_val;
      }
    } catch (const InfeasibleStart&) {
    }
    std::lock_guard<std::mutex> lk(sh.mu);
    if (val > sh.incumbent_phi + 1e-15 * std::max(1.0, std::abs(val))) {
      if (sh.incumbent.has_value()) ++sh.heuristic_improvements;
      sh.incumbent = improved;
      sh.incumbent_phi = val;
      sh.incumbent_history.emplace_back(std::move(improved), val);
      sh.cv.notify_all();
    }
  };

  auto current_upper = [&]() {
    // Requires sh.mu held.
    double ub = sh.incumbent_phi;
    if (!sh.open.empty()) ub = std::max(ub, sh.open.top()->bound);
    for (int w = 0; w < workers; ++w) ub = std::max(ub, sh.in_flight_bounds[w]);
    return ub;
  };

  auto worker = [&](int wid) {
    for (;;) {
      NodePtr node;
      {
        std::unique_lock<std::mutex> lk(sh.mu);
        sh.cv.wait(lk, [&] { return sh.stop || !sh.open.empty() || sh.in_flight == 0; });
        if (sh.stop) return;
        if (sh.open.empty()) {
          if (sh.in_flight == 0) {
            sh.cv.notify_all();
            return;
          }
          continue;
        }
        // Global termination checks happen at pop time.
        if (sh.incumbent.has_value() &&
            relative_gap(current_upper(), sh.incumbent_phi) <= opts.gap) {
          sh.stop = true;
          sh.termination = sh.open.empty() ? Termination::optimal : Termination::gap_reached;
          sh.cv.notify_all();
          return;
        }
        if (sh.nodes_expanded >= opts.node_cap) {
          sh.stop = true;
          sh.termination = Termination::node_cap;
          sh.cv.notify_all();
          return;
        }
        if (opts.time_cap_seconds > 0.0 && elapsed() > opts.time_cap_seconds) {
          sh.stop = true;
          sh.termination = Termination::time_cap;
          sh.cv.notify_all();
          return;
        }
        node = sh.open.top();
        sh.open.pop();
        if (sh.incumbent.has_value() &&
            relative_gap(node->bound, sh.incumbent_phi) <= opts.gap) {
          // Best remaining estimate is within the gap: done.
          sh.stop = true;
          sh.termination = Termination::gap_reached;
          sh.cv.notify_all();
          return;
        }
        ++sh.nodes_expanded;
        ++sh.in_flight;
        sh.in_flight_bounds[wid] = node->bound;
      }

      Eigen::VectorXd lower = cs.lower();
      Eigen::VectorXd upper = cs.upper();
      materialize_bounds(node.get(), lower, upper);

      bool pruned = false;
      QpSolution rel;
      try {
        QpOptions qp_opts = opts.relaxation;
        if (node->var >= 0) qp_opts.max_iter = opts.node_iter_cap;
        if (node->warm) qp_opts.start = *node->warm;
        rel = solve_relaxed_qp(q, cs, lower, upper, qp_opts);
      } catch (const Infeasible&) {
        pruned = true;
      } catch (const Unbounded&) {
        throw;  // missing size constraint: surface to the caller
      }

      std::vector<NodePtr> children;
      if (!pruned) {
        const double node_bound = std::min(rel.upper_bound, node->bound);

        if (auto rounded = round_incumbent(rel.design, cs)) {
          try_incumbent(*rounded);
        }

        int branch_var = -1;
        double branch_frac = 0.0;
        double branch_tie = -1.0;
        for (int j = 0; j < cs.n(); ++j) {
          if (!cs.integral(j)) continue;
          const double f = fractionality(rel.design.weights(j));
          if (f <= kIntTol) continue;
          if (branch_var < 0 || f > branch_frac + 1e-12 ||
              (f > branch_frac - 1e-12 && std::abs(q.h(j)) > branch_tie)) {
            branch_frac = f;
            branch_var = j;
            branch_tie = std::abs(q.h(j));
          }
        }

        bool prune_after_incumbent = false;
        {
          std::lock_guard<std::mutex> lk(sh.mu);
          if (sh.incumbent.has_value() &&
              relative_gap(node_bound, sh.incumbent_phi) <= opts.gap) {
            prune_after_incumbent = true;
          }
        }

        if (branch_var < 0) {
          // Relaxation optimum is integral: candidate incumbent, subtree done.
          Eigen::VectorXd snapped = rel.design.weights;
          for (int j = 0; j < cs.n(); ++j) {
            if (cs.integral(j)) snapped(j) = std::round(snapped(j));
          }
          try_incumbent(Design{snapped, true});
        } else if (!prune_after_incumbent) {
          const double v = rel.design.weights(branch_var);
          auto warm = std::make_shared<const Eigen::VectorXd>(rel.design.weights);
          auto down = std::make_shared<Node>();
          down->parent = node;
          down->var = branch_var;
          down->lo = lower(branch_var);
          down->hi = std::floor(v);
          down->bound = node_bound;
          down->depth = node->depth + 1;
          down->warm = warm;
          auto up = std::make_shared<Node>();
          up->parent = node;
          up->var = branch_var;
          up->lo = std::ceil(v);
          up->hi = upper(branch_var);
          up->bound = node_bound;
          up->depth = node->depth + 1;
          up->warm = warm;
          children.push_back(std::move(down));
          children.push_back(std::move(up));
        }
      }

      {
        std::lock_guard<std::mutex> lk(sh.mu);
        for (auto& ch : children) {
          const_cast<Node*>(ch.get())->id = sh.next_id++;
          sh.open.push(ch);
        }
        --sh.in_flight;
        sh.in_flight_bounds[wid] = -std::numeric_limits<double>::infinity();
        sh.cv.notify_all();
      }
    }
  };

  if (workers == 1) {
    worker(0);
  } else {
    std::exception_ptr first_error;
    std::mutex err_mu;
    auto guarded = [&](int wid) {
      try {
        worker(wid);
      } catch (...) {
        {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!first_error) first_error = std::current_exception();
        }
        std::lock_guard<std::mutex> lk(sh.mu);
        sh.stop = true;
        sh.cv.notify_all();
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(guarded, w);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  SolveReport rep;
  {
    std::lock_guard<std::mutex> lk(sh.mu);
    rep.incumbent = sh.incumbent;
    rep.incumbent_history = std::move(sh.incumbent_history);
    rep.incumbent_phi = sh.incumbent_phi;
    rep.nodes_expanded = sh.nodes_expanded;
    rep.heuristic_improvements = sh.heuristic_improvements;
    rep.termination = sh.termination;
    double ub = sh.incumbent_phi;
    if (!sh.open.empty()) ub = std::max(ub, sh.open.top()->bound);
    rep.upper_bound = ub;
    if (sh.incumbent.has_value()) {
      rep.gap = std::max(relative_gap(rep.upper_bound, rep.incumbent_phi), 0.0);
    }
  }
  rep.wall_seconds = elapsed();
  if (!rep.incumbent.has_value()) {
    if (rep.termination == Termination::optimal) {
      throw Infeasible("branch_and_bound: no integer feasible design exists");
    }
    // Caps hit before any incumbent; report carries the bound alone.
  }
  return rep;
}

}  // namespace aqua
