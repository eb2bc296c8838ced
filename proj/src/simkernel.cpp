// Copyright 2026 The epdist Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "epdist/simkernel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <optional>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <tuple>

#include <fmt/format.h>

#include "epdist/random.hpp"
#include "json_util.hpp"

namespace epdist {

namespace {

constexpr std::uint64_t kRequestStream = 1;
constexpr std::uint64_t kProtocolStream = 2;

// Declaration order is the tie-break order for simultaneous events.
enum class EventKind {
  kLinkDone,
  kBsmDone,
  kClassical,
  kSlotStart,
  kExpire,
};

const char* kind_name(EventKind k) {
  switch (k) {
    case EventKind::kLinkDone: return "link-attempt-complete";
    case EventKind::kBsmDone: return "bsm-complete";
    case EventKind::kClassical: return "classical-msg-arrive";
    case EventKind::kSlotStart: return "slot-start";
    case EventKind::kExpire: return "ep-expired";
  }
  return "?";
}

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::kSlotStart;
  std::uint64_t seq = 0;
  int run = -1;  // -1: stock-level event (vertex holds the super-link index)
  std::uint64_t epoch = 0;
  int vertex = -1;
  std::uint64_t token = 0;
  std::uint64_t ep_id = 0;
  bool success = false;
  int slot = -1;
};

struct Later {
  bool operator()(const Event& a, const Event& b) const {
    return std::tie(a.time, a.kind, a.seq) > std::tie(b.time, b.kind, b.seq);
  }
};

enum class VState { kIdle, kBlocked, kGenerating, kWanting, kReady, kBsm };

struct VertexState {
  VState state = VState::kIdle;
  double birth = 0.0;
  std::uint64_t token = 0;
  double gen_start = 0.0;
  std::uint64_t gen_attempts = 0;
  bool waiting = false;  // stock leaf registered as a waiter
};

struct Run {
  const ProtocolTree* tree = nullptr;
  std::vector<VertexState> v;
  std::uint64_t epoch = 0;
  int sl = -1;           // owning super-link for replenishment runs
  bool isolated = false; // stock leaves are bottomless
  bool active = false;
  int paused = 0;
  double cycle_start = 0.0;
  int taken = 0;
};

struct StockEp {
  std::uint64_t id;
  double birth;
};

struct Waiter {
  int run;
  std::uint64_t epoch;
  int vertex;
};

struct Stock {
  std::deque<StockEp> eps;
  std::deque<Waiter> waiters;
  int target = 0;
  double cycle_total = 0.0;
  std::uint64_t cycles = 0;
};

class Simulator {
 public:
  Simulator(const Topology& topo, const PhysicalParams& params,
            std::uint64_t seed, std::ostream* trace)
      : topo_(topo),
        p_(params),
        rng_(Rng::stream(seed, kProtocolStream)),
        trace_(trace),
        edge_busy_(topo.edge_count(), 0),
        edge_sl_leaves_(topo.edge_count()) {}

  // Registers a replenishment run for super-link `sl`, with a full stock.
  void add_super_link(const ProtocolTree* tree, int stock_target) {
    const int sl = static_cast<int>(stocks_.size());
    Stock stock;
    stock.target = stock_target;
    for (int i = 0; i < stock_target; ++i) {
      stock.eps.push_back({next_ep_id_++, 0.0});
      ++eps_.produced;
    }
    stocks_.push_back(std::move(stock));
    Run run;
    run.tree = tree;
    run.v.assign(tree->vertices().size(), {});
    run.sl = sl;
    const int r = static_cast<int>(runs_.size());
    runs_.push_back(std::move(run));
    for (std::size_t i = 0; i < tree->vertices().size(); ++i) {
      const ProtocolVertex& pv = tree->vertex(static_cast<int>(i));
      if (pv.kind == ProtocolVertex::Kind::kLink) {
        edge_sl_leaves_[pv.edge].push_back({r, static_cast<int>(i)});
      }
    }
  }

  int add_consumer_run(bool isolated) {
    Run run;
    run.isolated = isolated;
    runs_.push_back(std::move(run));
    return static_cast<int>(runs_.size()) - 1;
  }

  double now() const { return now_; }
  std::uint64_t link_attempts() const { return link_attempts_; }
  std::uint64_t pause_violations() const { return pause_violations_; }
  std::uint64_t events() const { return events_; }
  std::uint64_t tree_eps_expired() const { return tree_eps_expired_; }
  const EpAccounting& eps() const { return eps_; }
  const std::vector<Stock>& stocks() const { return stocks_; }
  const Run& run(int r) const { return runs_[r]; }

  void schedule_slot(double time, int slot) {
    Event e;
    e.time = time;
    e.kind = EventKind::kSlotStart;
    e.slot = slot;
    push(e);
  }

  // Starts `tree` on consumer run `r`.
  void launch(int r, const ProtocolTree* tree) {
    Run& run = runs_[r];
    run.tree = tree;
    run.v.assign(tree->vertices().size(), {});
    ++run.epoch;
    run.active = true;
    run.taken = 0;
    run.cycle_start = now_;
    root_done_ = false;
    start_vertex(r, tree->root());
  }

  // Cancels everything outstanding on consumer run `r`.
  void abort(int r) {
    Run& run = runs_[r];
    if (!run.active) return;
    for (std::size_t i = 0; i < run.v.size(); ++i) {
      VertexState& vs = run.v[i];
      if (vs.state == VState::kGenerating) {
        count_partial_attempts(run, static_cast<int>(i));
        release_edge(run.tree->vertex(static_cast<int>(i)).edge);
      }
    }
    for (Stock& stock : stocks_) {
      std::erase_if(stock.waiters, [&](const Waiter& w) { return w.run == r; });
    }
    run.active = false;
    ++run.epoch;
  }

  void set_paused(int r, bool pause) {
    Run& run = runs_[r];
    if (pause) {
      if (run.paused++ == 0) {
        for (std::size_t i = 0; i < run.v.size(); ++i) {
          if (run.v[i].state == VState::kGenerating) block(r, static_cast<int>(i));
        }
      }
    } else if (--run.paused == 0) {
      for (std::size_t i = 0; i < run.v.size(); ++i) {
        if (run.v[i].state == VState::kBlocked && !blocked(r, static_cast<int>(i))) {
          begin_generation(r, static_cast<int>(i));
        }
      }
    }
  }

  // Processes events until a slot-start event or the queue drains. Returns
  // the slot-start event, if any.
  std::optional<Event> run_until_slot() {
    while (!queue_.empty()) {
      const Event e = queue_.top();
      queue_.pop();
      if (e.time < now_) {
        throw std::logic_error(fmt::format(
            "event queue went backwards: {} after {}", e.time, now_));
      }
      now_ = e.time;
      if (e.kind == EventKind::kSlotStart) {
        ++events_;
        trace(e);
        return e;
      }
      dispatch(e);
    }
    return std::nullopt;
  }

  // Processes events until consumer run `r` delivers its root EP.
  void run_until_root(int r) {
    while (!root_done_) {
      if (queue_.empty()) {
        throw std::logic_error("isolated run stalled without a root EP");
      }
      const Event e = queue_.top();
      queue_.pop();
      if (e.time < now_) throw std::logic_error("event queue went backwards");
      now_ = e.time;
      dispatch(e);
    }
    (void)r;
  }

  // Called when a consumer run that is not isolated delivers its root EP.
  void on_served(std::function<void()> fn) { on_served_ = std::move(fn); }

  bool root_done() const { return root_done_; }
  double root_time() const { return root_time_; }

  // Resets the clock between independent isolated trials.
  void reset_clock() {
    queue_ = {};
    now_ = 0.0;
  }

 private:
  void push(Event e) {
    e.seq = next_seq_++;
    queue_.push(e);
  }

  void trace(const Event& e) {
    if (!trace_) return;
    std::string entities;
    if (e.kind == EventKind::kSlotStart) {
      entities = fmt::format("\"slot\":{}", e.slot);
    } else if (e.run < 0) {
      entities = fmt::format("\"sl\":{},\"ep\":{}", e.vertex, e.ep_id);
    } else {
      const Run& run = runs_[e.run];
      const ProtocolVertex& pv = run.tree->vertex(e.vertex);
      entities = fmt::format("\"run\":{},\"sl\":{},\"vertex\":{},\"ends\":[{},{}]",
                             e.run, run.sl, e.vertex, pv.left_end, pv.right_end);
      if (e.kind == EventKind::kClassical) {
        entities += fmt::format(",\"success\":{}", e.success);
      }
    }
    *trace_ << fmt::format("{{\"time_s\":{},\"kind\":\"{}\",\"entities\":{{{}}}}}\n",
                           e.time, kind_name(e.kind), entities);
  }

  bool stale(const Event& e) const {
    if (e.run < 0) return false;
    const Run& run = runs_[e.run];
    return e.epoch != run.epoch || e.token != run.v[e.vertex].token;
  }

  void dispatch(const Event& e) {
    if (stale(e)) return;
    ++events_;
    trace(e);
    switch (e.kind) {
      case EventKind::kLinkDone: on_link_done(e); break;
      case EventKind::kBsmDone: on_bsm_done(e); break;
      case EventKind::kClassical: on_classical(e); break;
      case EventKind::kExpire: on_expire(e); break;
      case EventKind::kSlotStart: break;
    }
  }

  Event vertex_event(EventKind kind, double time, int r, int i) {
    Event e;
    e.time = time;
    e.kind = kind;
    e.run = r;
    e.epoch = runs_[r].epoch;
    e.vertex = i;
    e.token = runs_[r].v[i].token;
    return e;
  }

  bool blocked(int r, int i) const {
    const Run& run = runs_[r];
    if (run.sl < 0) return false;
    return run.paused > 0 || edge_busy_[run.tree->vertex(i).edge] > 0;
  }

  void start_vertex(int r, int i) {
    Run& run = runs_[r];
    const ProtocolVertex& pv = run.tree->vertex(i);
    VertexState& vs = run.v[i];
    ++vs.token;
    vs.waiting = false;
    switch (pv.kind) {
      case ProtocolVertex::Kind::kLink:
        if (blocked(r, i)) {
          vs.state = VState::kBlocked;
        } else {
          begin_generation(r, i);
        }
        break;
      case ProtocolVertex::Kind::kStock: {
        vs.state = VState::kWanting;
        const int parent = run.tree->parent(i);
        if (parent < 0) {
          take(r, i);
          if (run.v[i].state == VState::kReady) became_ready(r, i);
        } else {
          try_fire(r, parent);
        }
        break;
      }
      case ProtocolVertex::Kind::kSwap:
        vs.state = VState::kIdle;
        start_vertex(r, pv.left);
        start_vertex(r, pv.right);
        break;
    }
  }

  void begin_generation(int r, int i) {
    Run& run = runs_[r];
    const ProtocolVertex& pv = run.tree->vertex(i);
    VertexState& vs = run.v[i];
    const double length = topo_.edges()[pv.edge].length_km;
    const std::uint64_t attempts =
        rng_.geometric(link_success_probability(length, p_));
    ++vs.token;
    vs.state = VState::kGenerating;
    vs.gen_start = now_;
    vs.gen_attempts = attempts;
    push(vertex_event(EventKind::kLinkDone,
                      now_ + static_cast<double>(attempts) *
                                 link_attempt_period(length, p_),
                      r, i));
    if (run.sl < 0 && !run.isolated) claim_edge(pv.edge);
  }

  void count_partial_attempts(const Run& run, int i) {
    const ProtocolVertex& pv = run.tree->vertex(i);
    const double period =
        link_attempt_period(topo_.edges()[pv.edge].length_km, p_);
    const auto done =
        static_cast<std::uint64_t>(std::floor((now_ - run.v[i].gen_start) / period));
    link_attempts_ += std::min(done, run.v[i].gen_attempts);
  }

  // Stops a generating super-link leaf; it resumes from scratch later.
  void block(int r, int i) {
    Run& run = runs_[r];
    count_partial_attempts(run, i);
    ++run.v[i].token;
    run.v[i].state = VState::kBlocked;
  }

  void claim_edge(int edge) {
    if (edge_busy_[edge]++ > 0) return;
    for (auto [r, i] : edge_sl_leaves_[edge]) {
      if (runs_[r].v[i].state == VState::kGenerating) block(r, i);
    }
  }

  void release_edge(int edge) {
    if (--edge_busy_[edge] > 0) return;
    for (auto [r, i] : edge_sl_leaves_[edge]) {
      if (runs_[r].v[i].state == VState::kBlocked && !blocked(r, i)) {
        begin_generation(r, i);
      }
    }
  }

  void on_link_done(const Event& e) {
    Run& run = runs_[e.run];
    VertexState& vs = run.v[e.vertex];
    if (blocked(e.run, e.vertex)) ++pause_violations_;
    link_attempts_ += vs.gen_attempts;
    const int edge = run.tree->vertex(e.vertex).edge;
    set_ready(e.run, e.vertex, now_);
    if (run.sl < 0 && !run.isolated) release_edge(edge);
    became_ready(e.run, e.vertex);
  }

  void set_ready(int r, int i, double birth) {
    VertexState& vs = runs_[r].v[i];
    ++vs.token;
    vs.state = VState::kReady;
    vs.birth = birth;
    vs.waiting = false;
    if (p_.ttl_s) {
      push(vertex_event(EventKind::kExpire, std::max(now_, birth + *p_.ttl_s),
                        r, i));
    }
  }

  void became_ready(int r, int i) {
    const int parent = runs_[r].tree->parent(i);
    if (parent < 0) {
      root_ready(r);
    } else {
      try_fire(r, parent);
    }
  }

  // Pulls a stock EP into stock leaf `i`, or queues as a waiter.
  void take(int r, int i) {
    Run& run = runs_[r];
    VertexState& vs = run.v[i];
    if (run.isolated) {
      set_ready(r, i, now_);
      return;
    }
    const int sl = run.tree->vertex(i).sl;
    Stock& stock = stocks_.at(sl);
    if (!stock.eps.empty()) {
      const StockEp ep = stock.eps.front();
      stock.eps.pop_front();
      ++eps_.taken;
      ++run.taken;
      set_ready(r, i, ep.birth);
      maybe_restart(sl);
      return;
    }
    if (!vs.waiting) {
      vs.waiting = true;
      stock.waiters.push_back({r, run.epoch, i});
      maybe_restart(sl);
    }
  }

  void try_fire(int r, int p) {
    Run& run = runs_[r];
    const ProtocolVertex& pv = run.tree->vertex(p);
    if (run.v[p].state != VState::kIdle) return;
    const int kids[2] = {pv.left, pv.right};
    for (int k = 0; k < 2; ++k) {
      const int c = kids[k];
      const int other = kids[1 - k];
      if (run.v[c].state == VState::kWanting &&
          run.v[other].state == VState::kReady) {
        take(r, c);
      }
    }
    if (run.v[pv.left].state != VState::kReady ||
        run.v[pv.right].state != VState::kReady) {
      return;
    }
    // Both EPs are locked into the measurement; their ttl no longer applies.
    ++run.v[pv.left].token;
    ++run.v[pv.right].token;
    run.v[p].state = VState::kBsm;
    ++run.v[p].token;
    push(vertex_event(EventKind::kBsmDone, now_ + p_.bsm_latency_s, r, p));
  }

  void on_bsm_done(const Event& e) {
    Event msg = vertex_event(
        EventKind::kClassical,
        now_ + runs_[e.run].tree->swap_delay(e.vertex, topo_, p_), e.run,
        e.vertex);
    msg.success = rng_.bernoulli(p_.bsm_success);
    push(msg);
  }

  void on_classical(const Event& e) {
    Run& run = runs_[e.run];
    const ProtocolVertex& pv = run.tree->vertex(e.vertex);
    if (e.success) {
      const double birth =
          std::min(run.v[pv.left].birth, run.v[pv.right].birth);
      run.v[pv.left].state = VState::kIdle;
      run.v[pv.right].state = VState::kIdle;
      set_ready(e.run, e.vertex, birth);
      became_ready(e.run, e.vertex);
      return;
    }
    // Both child EPs are discarded; regenerate the two subtrees.
    run.v[e.vertex].state = VState::kIdle;
    ++run.v[e.vertex].token;
    for (int c : {pv.left, pv.right}) {
      run.v[c].state = VState::kIdle;
      ++run.v[c].token;
    }
    start_vertex(e.run, pv.left);
    start_vertex(e.run, pv.right);
  }

  void on_expire(const Event& e) {
    if (e.run < 0) {
      Stock& stock = stocks_[e.vertex];
      const auto it = std::find_if(stock.eps.begin(), stock.eps.end(),
                                   [&](const StockEp& ep) { return ep.id == e.ep_id; });
      if (it == stock.eps.end()) return;
      stock.eps.erase(it);
      ++eps_.expired;
      maybe_restart(e.vertex);
      return;
    }
    Run& run = runs_[e.run];
    if (run.v[e.vertex].state != VState::kReady) return;
    ++tree_eps_expired_;
    start_vertex(e.run, e.vertex);
  }

  void maybe_restart(int sl) {
    Stock& stock = stocks_[sl];
    const int r = sl;  // replenishment runs are registered first
    Run& run = runs_[r];
    if (run.active) return;
    if (static_cast<int>(stock.eps.size()) >= stock.target &&
        stock.waiters.empty()) {
      return;
    }
    run.active = true;
    run.v.assign(run.tree->vertices().size(), {});
    ++run.epoch;
    run.cycle_start = now_;
    start_vertex(r, run.tree->root());
  }

  void root_ready(int r) {
    Run& run = runs_[r];
    if (run.sl < 0) {
      root_done_ = true;
      root_time_ = now_;
      run.active = false;
      ++run.epoch;
      if (!run.isolated && on_served_) on_served_();
      return;
    }
    const int sl = run.sl;
    Stock& stock = stocks_[sl];
    stock.cycle_total += now_ - run.cycle_start;
    ++stock.cycles;
    ++eps_.produced;
    const StockEp ep{next_ep_id_++, run.v[run.tree->root()].birth};
    run.active = false;
    ++run.epoch;
    bool delivered = false;
    while (!stock.waiters.empty() && !delivered) {
      const Waiter w = stock.waiters.front();
      stock.waiters.pop_front();
      Run& consumer = runs_[w.run];
      if (!consumer.active || consumer.epoch != w.epoch ||
          consumer.v[w.vertex].state != VState::kWanting) {
        continue;
      }
      ++eps_.taken;
      ++consumer.taken;
      set_ready(w.run, w.vertex, ep.birth);
      delivered = true;
      maybe_restart(sl);
      became_ready(w.run, w.vertex);
    }
    if (!delivered) {
      stock.eps.push_back(ep);
      if (p_.ttl_s) {
        Event x;
        x.time = std::max(now_, ep.birth + *p_.ttl_s);
        x.kind = EventKind::kExpire;
        x.vertex = sl;
        x.ep_id = ep.id;
        push(x);
      }
      maybe_restart(sl);
    }
  }

  const Topology& topo_;
  PhysicalParams p_;
  Rng rng_;
  std::ostream* trace_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  double now_ = 0.0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t next_ep_id_ = 0;
  std::vector<Run> runs_;
  std::vector<Stock> stocks_;
  std::vector<int> edge_busy_;
  std::vector<std::vector<std::pair<int, int>>> edge_sl_leaves_;
  EpAccounting eps_;
  std::uint64_t link_attempts_ = 0;
  std::uint64_t pause_violations_ = 0;
  std::uint64_t events_ = 0;
  std::uint64_t tree_eps_expired_ = 0;
  bool root_done_ = false;
  double root_time_ = 0.0;
  std::function<void()> on_served_;
};

int stock_swaps(const ProtocolTree& tree) {
  for (std::size_t i = 0; i < tree.vertices().size(); ++i) {
    if (tree.vertex(static_cast<int>(i)).kind != ProtocolVertex::Kind::kStock) {
      continue;
    }
    int depth = 0;
    for (int p = tree.parent(static_cast<int>(i)); p >= 0; p = tree.parent(p)) {
      ++depth;
    }
    return depth;
  }
  return 0;
}

void check_plan_fits(const Topology& topo, const Plan& plan,
                     const RequestSet& requests) {
  for (std::size_t i = 0; i < plan.sls.size(); ++i) {
    try {
      validate_path(topo, plan.sls[i].path);
    } catch (const std::exception& e) {
      throw std::invalid_argument(
          fmt::format("plan super-link {} does not fit the topology: {}", i,
                      e.what()));
    }
  }
  if (static_cast<int>(plan.assignment.size()) != requests.size()) {
    throw std::invalid_argument(fmt::format(
        "plan assigns {} requests but the request set has {}",
        plan.assignment.size(), requests.size()));
  }
  for (int r = 0; r < requests.size(); ++r) {
    const AssignmentEntry& e = plan.assignment[r];
    if (e.s != requests[r].s || e.d != requests[r].d) {
      throw std::invalid_argument(fmt::format(
          "plan assignment {} is for {}-{}, request is {}-{}", r, e.s, e.d,
          requests[r].s, requests[r].d));
    }
    if (e.sl >= static_cast<int>(plan.sls.size())) {
      throw std::invalid_argument(fmt::format(
          "plan assignment {} references super-link {}", r, e.sl));
    }
  }
}

}  // namespace

SimMetrics simulate(const Topology& topo, const Plan& plan,
                    const RequestSet& requests, const PhysicalParams& params,
                    int n_slots, std::uint64_t seed, std::ostream* trace) {
  if (n_slots < 1) throw std::invalid_argument("n_slots must be at least 1");
  if (requests.empty()) throw std::invalid_argument("request set is empty");
  params.validate();
  check_plan_fits(topo, plan, requests);

  std::vector<ProtocolTree> sl_trees;
  for (const SuperLink& sl : plan.sls) {
    sl_trees.push_back(ProtocolTree::from_swapping_tree(sl.path, sl.tree, topo));
  }
  std::vector<ProtocolTree> request_trees;
  std::vector<std::vector<int>> pauses(requests.size());
  for (int r = 0; r < requests.size(); ++r) {
    const AssignmentEntry& entry = plan.assignment[r];
    request_trees.push_back(request_tree(entry, plan.sls, topo, params));
    const auto nodes = request_trees.back().nodes();
    for (std::size_t i = 0; i < plan.sls.size(); ++i) {
      if (static_cast<int>(i) == entry.sl) continue;
      if (paths_intersect(nodes, plan.sls[i].path)) {
        pauses[r].push_back(static_cast<int>(i));
      }
    }
  }

  Simulator sim(topo, params, seed, trace);
  for (std::size_t i = 0; i < plan.sls.size(); ++i) {
    sim.add_super_link(&sl_trees[i], plan.sls[i].stock_target);
  }
  const int consumer = sim.add_consumer_run(false);
  for (int k = 0; k <= n_slots; ++k) sim.schedule_slot(k * params.slot_s, k);

  std::vector<double> cumulative;
  double acc = 0.0;
  for (const RequestPair& rq : requests.pairs()) {
    acc += rq.weight;
    cumulative.push_back(acc);
  }
  Rng draws = Rng::stream(seed, kRequestStream);

  SimMetrics m;
  int current = -1;
  double slot_start = 0.0;
  auto finish = [&](bool timeout) {
    RequestRecord rec;
    rec.slot = static_cast<int>(m.records.size());
    rec.request = current;
    rec.timeout = timeout;
    rec.latency_s = timeout ? params.slot_s : sim.root_time() - slot_start;
    rec.sl = plan.assignment[current].sl;
    rec.sl_eps_consumed = sim.run(consumer).taken;
    rec.stock_swaps = stock_swaps(request_trees[current]);
    m.records.push_back(rec);
    if (timeout) sim.abort(consumer);
    for (int i : pauses[current]) sim.set_paused(i, false);
    current = -1;
  };

  sim.on_served([&] { finish(false); });
  for (;;) {
    const auto slot = sim.run_until_slot();
    if (!slot) break;
    if (current >= 0) finish(true);
    if (slot->slot == n_slots) break;
    const double u = draws.uniform() * acc;
    current = static_cast<int>(
        std::upper_bound(cumulative.begin(), cumulative.end(), u) -
        cumulative.begin());
    current = std::min(current, requests.size() - 1);
    slot_start = sim.now();
    for (int i : pauses[current]) sim.set_paused(i, true);
    sim.launch(consumer, &request_trees[current]);
  }

  for (const RequestRecord& rec : m.records) {
    m.latencies_s.push_back(rec.latency_s);
    if (rec.timeout) {
      ++m.timeouts;
    } else {
      ++m.served;
    }
  }
  double total = 0.0;
  for (double t : m.latencies_s) {
    total += t;
    m.max_latency_s = std::max(m.max_latency_s, t);
  }
  m.avg_latency_s = m.latencies_s.empty() ? 0.0 : total / m.latencies_s.size();
  int sl_served = 0;
  double consumed = 0.0;
  for (const RequestRecord& rec : m.records) {
    if (rec.timeout || rec.sl < 0) continue;
    ++sl_served;
    consumed += rec.sl_eps_consumed;
  }
  m.mean_sl_eps_consumed = sl_served ? consumed / sl_served : 0.0;
  for (const Stock& stock : sim.stocks()) {
    const double mean = stock.cycles ? stock.cycle_total / stock.cycles : 0.0;
    m.sl_mean_cycle_s.push_back(mean);
    m.sl_cycles.push_back(stock.cycles);
    m.sl_aggregate_latency_s += mean;
  }
  m.link_attempts = sim.link_attempts();
  m.tree_eps_expired = sim.tree_eps_expired();
  m.eps = sim.eps();
  for (const Stock& stock : sim.stocks()) m.eps.in_stock_end += stock.eps.size();
  m.pause_violations = sim.pause_violations();
  m.events = sim.events();
  return m;
}

McEstimate mc_tree_latency(const ProtocolTree& tree, const Topology& topo,
                           const PhysicalParams& params, int trials,
                           std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  params.validate();
  Simulator sim(topo, params, seed, nullptr);
  const int r = sim.add_consumer_run(true);
  double sum = 0.0, sum_sq = 0.0;
  for (int t = 0; t < trials; ++t) {
    sim.reset_clock();
    sim.launch(r, &tree);
    sim.run_until_root(r);
    const double x = sim.root_time();
    sum += x;
    sum_sq += x * x;
  }
  McEstimate est;
  est.trials = trials;
  est.mean_s = sum / trials;
  if (trials > 1) {
    const double var =
        std::max(0.0, (sum_sq - sum * sum / trials) / (trials - 1));
    est.stderr_s = std::sqrt(var / trials);
  }
  est.mean_link_attempts = static_cast<double>(sim.link_attempts()) / trials;
  return est;
}

McEstimate mc_tree_latency(const Path& path, const SwappingTree& tree,
                           const Topology& topo, const PhysicalParams& params,
                           int trials, std::uint64_t seed) {
  const ProtocolTree pt = ProtocolTree::from_swapping_tree(path, tree, topo);
  return mc_tree_latency(pt, topo, params, trials, seed);
}

void save_metrics(const SimMetrics& m, const std::filesystem::path& path) {
  detail::json doc;
  doc["served"] = m.served;
  doc["timeouts"] = m.timeouts;
  doc["avg_latency_s"] = m.avg_latency_s;
  doc["max_latency_s"] = m.max_latency_s;
  doc["sl_aggregate_latency_s"] = m.sl_aggregate_latency_s;
  doc["mean_sl_eps_consumed"] = m.mean_sl_eps_consumed;
  doc["link_attempts"] = m.link_attempts;
  doc["pause_violations"] = m.pause_violations;
  doc["events"] = m.events;
  doc["eps"] = {{"produced", m.eps.produced},
                {"taken", m.eps.taken},
                {"expired", m.eps.expired},
                {"in_stock_end", m.eps.in_stock_end}};
  doc["sl_mean_cycle_s"] = m.sl_mean_cycle_s;
  doc["sl_cycles"] = m.sl_cycles;
  doc["requests"] = detail::json::array();
  for (const RequestRecord& r : m.records) {
    doc["requests"].push_back({{"slot", r.slot},
                               {"request", r.request},
                               {"latency_s", r.latency_s},
                               {"timeout", r.timeout},
                               {"sl", r.sl},
                               {"sl_eps_consumed", r.sl_eps_consumed}});
  }
  detail::write_json_file(doc, path);
}

}  // namespace epdist
