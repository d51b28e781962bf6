#include "mpnet/engine.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <random>
#include <sstream>
#include <unordered_map>

#include "mpnet/error.hpp"

namespace mpnet::engine {

using net::FlatArc;
using net::FlatNet;
using net::FlatTransition;

std::uint64_t PlaceMarking::size() const {
  std::uint64_t n = queue.size();
  for (const auto& [v, c] : depository) n += c;
  return n;
}

const PlaceMarking* SimState::marking(std::size_t place) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), place,
                             [](const auto& e, std::size_t p) { return e.first < p; });
  if (it == entries_.end() || it->first != place) return nullptr;
  return &it->second;
}

PlaceMarking& SimState::at(std::size_t place) {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), place,
                             [](const auto& e, std::size_t p) { return e.first < p; });
  if (it == entries_.end() || it->first != place) {
    it = entries_.insert(it, {static_cast<std::uint32_t>(place), PlaceMarking{}});
  }
  return it->second;
}

void SimState::normalize() {
  entries_.erase(std::remove_if(entries_.begin(), entries_.end(),
                                [](const auto& e) { return e.second.empty(); }),
                 entries_.end());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [place, m] : entries_) {
    h = hash_mix(h, place);
    h = hash_mix(h, m.queue.size());
    for (const auto& v : m.queue) h = hash_mix(h, v.hash());
    h = hash_mix(h, m.depository.size());
    for (const auto& [v, c] : m.depository) {
      h = hash_mix(h, v.hash());
      h = hash_mix(h, c);
    }
  }
  hash_ = h;
}

namespace {

using Avail = std::vector<std::pair<Value, std::uint64_t>>;

bool subset(const std::set<std::string>& vars, const Binding& b) {
  return std::all_of(vars.begin(), vars.end(), [&](const std::string& v) {
    return v == expr::kWildcard || b.count(v) != 0;
  });
}

bool is_binder(const expr::Expr& e) { return expr::is_var(e) && !expr::is_wildcard(e); }

bool selection_less(const Selection& a, const Selection& b) {
  if (a.arc != b.arc) return a.arc < b.arc;
  return a.tokens < b.tokens;
}

bool candidate_less(const Candidate& a, const Candidate& b) {
  if (a.transition != b.transition) return a.transition < b.transition;
  if (a.binding != b.binding) return a.binding < b.binding;
  return std::lexicographical_compare(a.selections.begin(), a.selections.end(),
                                      b.selections.begin(), b.selections.end(), selection_less);
}

void canonicalize(std::vector<Candidate>& cs) {
  std::sort(cs.begin(), cs.end(), candidate_less);
  cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
}

}  // namespace

struct Engine::Plan {
  std::vector<std::size_t> order;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> picks;
  std::vector<std::size_t> required;
};

Engine::Engine(std::shared_ptr<const FlatNet> net, SearchOptions options)
    : net_(std::move(net)), options_(options) {
  for (std::size_t i = 0; i < net_->places.size(); ++i) {
    if (net_->places[i].terminal) terminal_places_.push_back(i);
  }
  std::vector<Plan> plans;
  for (const auto& t : net_->transitions) {
    Plan plan;
    // Arc order: repeatedly take the first arc whose needed variables are bound.
    std::set<std::string> bound;
    std::vector<bool> used(t.inputs.size(), false);
    for (std::size_t round = 0; round < t.inputs.size(); ++round) {
      std::size_t pick = t.inputs.size();
      for (std::size_t i = 0; i < t.inputs.size() && pick == t.inputs.size(); ++i) {
        if (used[i]) continue;
        const auto& in = t.inputs[i].input;
        std::set<std::string> binds;
        for (const auto& p : in.pattern) {
          if (is_binder(*p)) binds.insert(p->name);
        }
        if (in.bulk()) binds.insert(std::get<std::string>(in.size));
        if (in.values) binds.insert(*in.values);
        std::set<std::string> needs;
        for (const auto& c : in.conditions) {
          auto fv = expr::free_vars(*c);
          needs.insert(fv.begin(), fv.end());
        }
        for (const auto& p : in.pattern) {
          if (is_binder(*p)) continue;
          auto fv = expr::free_vars(*p);
          needs.insert(fv.begin(), fv.end());
        }
        bool ok = std::all_of(needs.begin(), needs.end(), [&](const std::string& v) {
          return v == expr::kWildcard || bound.count(v) || binds.count(v);
        });
        if (ok) pick = i;
      }
      if (pick == t.inputs.size()) {
        pick = static_cast<std::size_t>(std::find(used.begin(), used.end(), false) - used.begin());
      }
      used[pick] = true;
      plan.order.push_back(pick);
      const auto& in = t.inputs[pick].input;
      for (const auto& p : in.pattern) {
        if (is_binder(*p)) bound.insert(p->name);
      }
      if (in.bulk()) bound.insert(std::get<std::string>(in.size));
      if (in.values) bound.insert(*in.values);
    }

    std::vector<expr::ExprPtr> calls;
    auto collect = [&](const std::vector<expr::ExprPtr>& es) {
      for (const auto& e : es) expr::collect_picks(e, calls);
    };
    for (const auto& a : t.inputs) {
      collect(a.input.conditions);
      collect(a.input.pattern);
    }
    for (const auto& a : t.outputs) {
      collect(a.output.conditions);
      collect(a.output.pattern);
    }
    for (const auto& g : t.locations) {
      collect(g.conditions);
      if (g.location) expr::collect_picks(g.location, calls);
    }
    if (t.event) expr::collect_picks(t.event, calls);
    for (const auto& c : calls) {
      if (c->args.size() != 2) {
        throw Error(ErrorKind::TypeMismatch, "pick_address takes two arguments");
      }
      auto lo = expr::eval(*c->args[0], {});
      auto hi = expr::eval(*c->args[1], {});
      if (!lo.is(Value::Kind::Nat) || !hi.is(Value::Kind::Nat)) {
        throw Error(ErrorKind::TypeMismatch, "pick_address bounds must be natural numbers");
      }
      plan.picks.emplace_back(lo.as_nat(), hi.as_nat());
    }
    std::sort(plan.picks.begin(), plan.picks.end());
    plan.picks.erase(std::unique(plan.picks.begin(), plan.picks.end()), plan.picks.end());

    for (const auto& a : t.inputs) {
      const auto& in = a.input;
      if (in.conditions.empty() && !in.bulk() && std::get<std::uint64_t>(in.size) > 0) {
        plan.required.push_back(a.place);
      }
    }
    plans.push_back(std::move(plan));
  }
  plans_ = std::make_shared<const std::vector<Plan>>(std::move(plans));
}

SimState Engine::initial_state() const {
  SimState s;
  for (std::size_t i = 0; i < net_->places.size(); ++i) {
    const auto& p = net_->places[i];
    if (p.initial.empty()) continue;
    auto& m = s.at(i);
    for (const auto& v : p.initial) {
      if (!admits(p.color, v)) {
        throw Error(ErrorKind::ColorMismatch, "initial token " + to_string(v) + " of " + p.id());
      }
      if (p.head) {
        m.queue.push_back(v);
      } else {
        ++m.depository[v];
      }
    }
  }
  s.normalize();
  return settle(s).first;
}

namespace {

class Searcher {
 public:
  Searcher(const FlatNet& net, std::size_t t, const std::vector<std::size_t>& order,
           std::map<std::size_t, Avail> avail, std::size_t budget, std::vector<Candidate>& out)
      : net_(net),
        tr_(net.transitions[t]),
        t_(t),
        order_(order),
        avail_(std::move(avail)),
        budget_(budget),
        out_(out) {}

  void run(Binding b) {
    binding_ = std::move(b);
    arc(0);
  }

 private:
  void tick() {
    if (++steps_ > budget_) {
      throw Error(ErrorKind::BindingSearchBudgetExceeded,
                  "binding search for " + tr_.id() + " exceeded " + std::to_string(budget_) +
                      " steps");
    }
  }

  bool conditions_hold(const std::vector<expr::ExprPtr>& conds) {
    for (const auto& c : conds) {
      Value v = expr::eval(*c, binding_);
      if (!v.is(Value::Kind::Bool)) {
        throw Error(ErrorKind::ConditionNotBoolean, expr::to_string(*c) + " evaluated to " +
                                                        to_string(v));
      }
      if (!v.as_bool()) return false;
    }
    return true;
  }

  void arc(std::size_t i) {
    tick();
    if (i == order_.size()) {
      emit();
      return;
    }
    arc_index_ = order_[i];
    const FlatArc& a = tr_.inputs[arc_index_];
    const auto& in = a.input;
    level_ = i;

    bool binds = in.values && !binding_.count(*in.values);
    if (in.bulk() && !binding_.count(std::get<std::string>(in.size))) binds = true;
    for (const auto& p : in.pattern) {
      if (is_binder(*p) && !binding_.count(p->name)) binds = true;
    }
    if (!binds && !conditions_hold(in.conditions)) {
      // Eval yields the empty sequence: the arc takes nothing.
      arc(i + 1);
      return;
    }
    std::vector<Value> taken;
    element(i, 0, taken, binds);
  }

  void element(std::size_t i, std::size_t j, std::vector<Value>& taken, bool binds) {
    tick();
    const FlatArc& a = tr_.inputs[order_[i]];
    const auto& in = a.input;
    Avail& av = avail_[a.place];
    if (j == in.pattern.size()) {
      if (in.bulk()) {
        rest(i, taken, binds);
      } else {
        std::uint64_t k = std::get<std::uint64_t>(in.size);
        extras(i, k - in.pattern.size(), 0, taken, binds);
      }
      return;
    }
    const expr::Expr& e = *in.pattern[j];
    if (in.bulk() && expr::is_wildcard(e)) {
      // Everything left is taken anyway; a wildcard demands no token of its own.
      element(i, j + 1, taken, binds);
      return;
    }
    auto take = [&](std::size_t idx) {
      --av[idx].second;
      taken.push_back(av[idx].first);
    };
    auto untake = [&](std::size_t idx) {
      ++av[idx].second;
      taken.pop_back();
    };
    if (expr::is_wildcard(e)) {
      for (std::size_t idx = 0; idx < av.size(); ++idx) {
        if (av[idx].second == 0) continue;
        take(idx);
        element(i, j + 1, taken, binds);
        untake(idx);
      }
      return;
    }
    if (is_binder(e) && !binding_.count(e.name)) {
      for (std::size_t idx = 0; idx < av.size(); ++idx) {
        if (av[idx].second == 0) continue;
        take(idx);
        binding_.emplace(e.name, av[idx].first);
        element(i, j + 1, taken, binds);
        binding_.erase(e.name);
        untake(idx);
      }
      return;
    }
    if (!subset(expr::free_vars(e), binding_)) {
      throw Error(ErrorKind::UnsupportedPattern,
                  "pattern " + expr::to_string(e) + " of " + tr_.id() +
                      " mixes unbound variables into a compound expression");
    }
    Value want = expr::eval(e, binding_);
    for (std::size_t idx = 0; idx < av.size(); ++idx) {
      if (av[idx].second == 0 || !loose_equal(av[idx].first, want)) continue;
      take(idx);
      element(i, j + 1, taken, binds);
      untake(idx);
    }
  }

  void extras(std::size_t i, std::uint64_t need, std::size_t from, std::vector<Value>& taken,
              bool binds) {
    tick();
    const FlatArc& a = tr_.inputs[order_[i]];
    Avail& av = avail_[a.place];
    if (need == 0) {
      finish(i, taken, binds);
      return;
    }
    for (std::size_t idx = from; idx < av.size(); ++idx) {
      if (av[idx].second == 0) continue;
      --av[idx].second;
      taken.push_back(av[idx].first);
      extras(i, need - 1, idx, taken, binds);
      taken.pop_back();
      ++av[idx].second;
    }
  }

  // Bulk arc: take every remaining token and bind the size variable.
  void rest(std::size_t i, std::vector<Value>& taken, bool binds) {
    const FlatArc& a = tr_.inputs[order_[i]];
    Avail& av = avail_[a.place];
    const std::size_t matched = taken.size();
    Avail saved = av;
    for (auto& e : av) {
      taken.insert(taken.end(), e.second, e.first);
      e.second = 0;
    }
    const std::string& size_var = std::get<std::string>(a.input.size);
    Value count = Value::nat(taken.size());
    auto it = binding_.find(size_var);
    bool fresh = it == binding_.end();
    if (fresh) {
      binding_.emplace(size_var, count);
      finish(i, taken, binds);
      binding_.erase(size_var);
    } else if (it->second == count) {
      finish(i, taken, binds);
    }
    av = std::move(saved);
    taken.resize(matched);
  }

  void finish(std::size_t i, const std::vector<Value>& taken, bool binds) {
    const FlatArc& a = tr_.inputs[order_[i]];
    const auto& in = a.input;
    std::vector<Value> sorted = taken;
    std::sort(sorted.begin(), sorted.end());
    bool bound_values = false;
    if (in.values) {
      auto it = binding_.find(*in.values);
      if (it != binding_.end()) {
        if (it->second != Value::tuple(sorted)) return;
      } else {
        binding_.emplace(*in.values, Value::tuple(sorted));
        bound_values = true;
      }
    }
    bool ok = !binds || conditions_hold(in.conditions);
    if (ok) {
      const bool ro = net::is_read_only(a.category);
      Avail& av = avail_[a.place];
      auto give_back = [&](int dir) {
        for (const auto& v : taken) {
          for (auto& e : av) {
            if (e.first == v) {
              e.second = static_cast<std::uint64_t>(static_cast<std::int64_t>(e.second) + dir);
              break;
            }
          }
        }
      };
      if (ro) give_back(+1);
      selections_.push_back({order_[i], a.place, sorted, ro});
      arc(i + 1);
      selections_.pop_back();
      if (ro) give_back(-1);
    }
    if (bound_values) binding_.erase(*in.values);
  }

  void emit() {
    Candidate c;
    c.transition = t_;
    c.binding = binding_;
    c.selections = selections_;
    std::sort(c.selections.begin(), c.selections.end(), selection_less);
    out_.push_back(std::move(c));
  }

  const FlatNet& net_;
  const FlatTransition& tr_;
  std::size_t t_;
  const std::vector<std::size_t>& order_;
  std::map<std::size_t, Avail> avail_;
  std::size_t budget_;
  std::vector<Candidate>& out_;
  Binding binding_;
  std::vector<Selection> selections_;
  std::size_t steps_ = 0;
  std::size_t arc_index_ = 0;
  std::size_t level_ = 0;
};

// Tokens visible to binding search at place `p`: the depository, plus (in
// the scheduling phase) every token that could be served right now.
Avail availability(const net::FlatPlace& place, const PlaceMarking* m, bool augmented) {
  Avail out;
  if (!m) return out;
  std::map<Value, std::uint64_t> merged(m->depository.begin(), m->depository.end());
  if (augmented && place.head) {
    for (auto idx : queue::serviceable(m->queue, m->depository, *place.head, place.service_key)) {
      ++merged[m->queue[idx]];
    }
  }
  out.assign(merged.begin(), merged.end());
  return out;
}

}  // namespace

void Engine::search_transition(const SimState& s, std::size_t t, bool augmented,
                               std::vector<Candidate>& out) const {
  const auto& tr = net_->transitions[t];
  const auto& plan = (*plans_)[t];
  std::map<std::size_t, Avail> avail;
  for (const auto& a : tr.inputs) {
    if (!avail.count(a.place)) {
      avail[a.place] = availability(net_->places[a.place], s.marking(a.place), augmented);
    }
  }
  for (auto p : plan.required) {
    const auto& av = avail[p];
    if (std::none_of(av.begin(), av.end(), [](const auto& e) { return e.second > 0; })) return;
  }

  // Every combination of pick_address choices.
  std::vector<std::uint64_t> choice;
  for (const auto& [lo, hi] : plan.picks) {
    if (lo > hi) return;
    choice.push_back(lo);
  }
  while (true) {
    Binding b;
    for (std::size_t i = 0; i < plan.picks.size(); ++i) {
      b.emplace(expr::pick_key(plan.picks[i].first, plan.picks[i].second), Value::nat(choice[i]));
    }
    Searcher searcher(*net_, t, plan.order, avail, options_.budget, out);
    searcher.run(std::move(b));
    std::size_t k = 0;
    while (k < choice.size() && choice[k] == plan.picks[k].second) {
      choice[k] = plan.picks[k].first;
      ++k;
    }
    if (k == choice.size()) break;
    ++choice[k];
  }
}

std::vector<Candidate> Engine::search(const SimState& s, bool augmented) const {
  std::vector<Candidate> out;
  for (std::size_t t = 0; t < net_->transitions.size(); ++t) {
    search_transition(s, t, augmented, out);
  }
  canonicalize(out);
  for (auto& c : out) c.state_hash = s.hash();
  return out;
}

std::pair<SimState, std::vector<Candidate>> Engine::settle(const SimState& s) const {
  bool pending = false;
  for (const auto& [p, m] : s.entries()) {
    const auto& place = net_->places[p];
    if (place.head && !queue::serviceable(m.queue, m.depository, *place.head, place.service_key)
                           .empty()) {
      pending = true;
      break;
    }
  }
  if (!pending) return {s, search(s, false)};

  auto candidates = search(s, true);
  std::map<std::size_t, queue::Demand> demand;
  for (const auto& c : candidates) {
    for (const auto& sel : c.selections) {
      const auto& place = net_->places[sel.place];
      if (!place.head) continue;
      const PlaceMarking* m = s.marking(sel.place);
      for (const auto& v : sel.tokens) {
        if (!m || !m->depository.count(v)) demand[sel.place].values.push_back(v);
      }
    }
  }
  if (demand.empty()) return {s, std::move(candidates)};
  SimState next = s;
  for (auto& [p, d] : demand) {
    const auto& place = net_->places[p];
    auto& m = next.at(p);
    queue::schedule(m.queue, m.depository, d, *place.head, place.service_key);
  }
  next.normalize();
  for (auto& c : candidates) c.state_hash = next.hash();
  return {std::move(next), std::move(candidates)};
}

FireResult Engine::fire(const SimState& s, const Candidate& c) const {
  if (c.state_hash != s.hash()) {
    throw Error(ErrorKind::StaleCandidate, "candidate was computed for another state");
  }
  if (c.transition >= net_->transitions.size()) {
    throw Error(ErrorKind::StaleCandidate, "no such transition");
  }
  const auto& tr = net_->transitions[c.transition];
  SimState n = s;
  for (const auto& sel : c.selections) {
    if (sel.read_only) continue;
    auto& dep = n.at(sel.place).depository;
    for (const auto& v : sel.tokens) {
      auto it = dep.find(v);
      if (it == dep.end()) {
        throw Error(ErrorKind::StaleCandidate,
                    "token " + to_string(v) + " missing from " + net_->places[sel.place].id());
      }
      if (--it->second == 0) dep.erase(it);
    }
  }

  const Binding& b = c.binding;
  for (const auto& g : tr.locations) {
    bool active = true;
    for (const auto& cond : g.conditions) {
      Value v = expr::eval(*cond, b);
      if (!v.is(Value::Kind::Bool)) {
        throw Error(ErrorKind::ConditionNotBoolean, expr::to_string(*cond));
      }
      active = active && v.as_bool();
    }
    if (!active) continue;
    Value loc = expr::eval(*g.location, b);
    bool ok = loc.is(Value::Kind::Nat) &&
              std::find(g.areas.begin(), g.areas.end(), loc.as_nat()) != g.areas.end();
    if (!ok) {
      throw Error(ErrorKind::InvalidLocation, "location " + expr::to_string(*g.location) +
                                                  " of " + tr.id() + " evaluated to " +
                                                  to_string(loc));
    }
  }

  for (const auto& a : tr.outputs) {
    const auto& place = net_->places[a.place];
    for (auto& v : expr::eval_arc(a.output.conditions, a.output.pattern, b)) {
      if (!admits(place.color, v)) {
        throw Error(ErrorKind::ColorMismatch, to_string(v) + " is not admissible in " +
                                                  place.id() + " (" + to_string(place.color) +
                                                  ")");
      }
      auto& m = n.at(a.place);
      if (place.head) {
        m.queue.push_back(std::move(v));
      } else {
        ++m.depository[std::move(v)];
      }
    }
  }

  FireResult r;
  if (tr.event) r.events.push_back(expr::eval(*tr.event, b));
  n.normalize();
  auto [settled, enabled] = settle(n);
  r.state = std::move(settled);
  r.enabled = std::move(enabled);
  return r;
}

bool Engine::is_terminal(const SimState& s) const {
  if (terminal_places_.empty()) return false;
  return std::all_of(terminal_places_.begin(), terminal_places_.end(),
                     [&](std::size_t p) { return s.marking(p) != nullptr; });
}

std::string Engine::describe(const SimState& s) const {
  std::ostringstream os;
  for (const auto& [p, m] : s.entries()) {
    os << net_->places[p].id() << ":";
    if (net_->places[p].head) {
      os << " queue <";
      for (std::size_t i = 0; i < m.queue.size(); ++i) {
        os << (i ? ", " : "") << to_string(m.queue[i]);
      }
      os << ">";
    }
    os << " {";
    bool first = true;
    for (const auto& [v, c] : m.depository) {
      for (std::uint64_t k = 0; k < c; ++k) {
        os << (first ? "" : ", ") << to_string(v);
        first = false;
      }
    }
    os << "}\n";
  }
  return os.str();
}

std::string to_string(const Candidate& c, const FlatNet& net) {
  return net.transitions[c.transition].id() + " " + to_string(c.binding);
}

Chooser seeded_chooser(std::uint64_t seed) {
  auto rng = std::make_shared<std::mt19937_64>(seed);
  return [rng](const std::vector<Candidate>& cs, const SimState&) -> std::size_t {
    return static_cast<std::size_t>((*rng)() % cs.size());
  };
}

Trace run(const Engine& engine, const SimState& s0, const Chooser& chooser, std::size_t max_steps) {
  Trace trace;
  auto [s, enabled] = engine.settle(s0);
  for (std::size_t step = 0; step < max_steps && !enabled.empty(); ++step) {
    std::size_t idx = chooser(enabled, s);
    if (idx >= enabled.size()) throw Error(ErrorKind::StaleCandidate, "chooser out of range");
    const Candidate& c = enabled[idx];
    auto r = engine.fire(s, c);
    TraceStep ts;
    ts.step = step;
    ts.transition = engine.net().transitions[c.transition].id();
    ts.candidate = idx;
    ts.binding = c.binding;
    ts.pre_hash = s.hash();
    ts.post_hash = r.state.hash();
    ts.events = std::move(r.events);
    trace.steps.push_back(std::move(ts));
    s = std::move(r.state);
    enabled = std::move(r.enabled);
  }
  trace.final_state = std::move(s);
  return trace;
}

Trace replay(const Engine& engine, const SimState& s0, const std::vector<TraceStep>& steps) {
  std::size_t i = 0;
  Chooser chooser = [&](const std::vector<Candidate>& cs, const SimState& s) -> std::size_t {
    const auto& rec = steps[i++];
    if (rec.pre_hash != s.hash()) {
      throw Error(ErrorKind::StaleCandidate,
                  "replay diverged before step " + std::to_string(rec.step));
    }
    if (rec.candidate >= cs.size()) {
      throw Error(ErrorKind::StaleCandidate,
                  "step " + std::to_string(rec.step) + " names candidate " +
                      std::to_string(rec.candidate) + " of " + std::to_string(cs.size()));
    }
    return rec.candidate;
  };
  Trace t = run(engine, s0, chooser, steps.size());
  if (t.steps.size() != steps.size()) {
    throw Error(ErrorKind::StaleCandidate, "replay ended early after " +
                                               std::to_string(t.steps.size()) + " steps");
  }
  for (std::size_t k = 0; k < steps.size(); ++k) {
    if (t.steps[k].post_hash != steps[k].post_hash) {
      throw Error(ErrorKind::StaleCandidate,
                  "replay diverged after step " + std::to_string(steps[k].step));
    }
  }
  return t;
}

std::vector<std::size_t> StateGraph::out_edges(std::size_t state) const {
  std::vector<std::size_t> out;
  auto it = std::lower_bound(edges.begin(), edges.end(), state,
                             [](const GraphEdge& e, std::size_t s) { return e.from < s; });
  for (; it != edges.end() && it->from == state; ++it) {
    out.push_back(static_cast<std::size_t>(it - edges.begin()));
  }
  return out;
}

StateGraph explore(const Engine& engine, const Limits& limits) {
  StateGraph g;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> index;
  auto s0 = engine.initial_state();
  auto [init, init_enabled] = engine.settle(s0);

  auto intern = [&](SimState s, std::size_t depth, bool& fresh) -> std::optional<std::size_t> {
    auto& bucket = index[s.hash()];
    for (auto id : bucket) {
      if (g.states[id] == s) {
        fresh = false;
        return id;
      }
    }
    if (g.states.size() >= limits.max_states) return std::nullopt;
    fresh = true;
    bucket.push_back(g.states.size());
    g.states.push_back(std::move(s));
    g.depth.push_back(depth);
    return g.states.size() - 1;
  };

  bool fresh = false;
  intern(std::move(init), 0, fresh);
  std::deque<std::pair<std::size_t, std::vector<Candidate>>> frontier;
  frontier.emplace_back(0, std::move(init_enabled));
  while (!frontier.empty()) {
    auto [id, enabled] = std::move(frontier.front());
    frontier.pop_front();
    if (enabled.empty()) {
      if (engine.is_terminal(g.states[id]) || !engine.has_terminal_places()) {
        g.terminals.push_back(id);
      } else {
        g.deadlocks.push_back(id);
      }
      continue;
    }
    if (g.depth[id] >= limits.max_depth) {
      g.unexpanded.push_back(id);
      g.limit_exceeded = true;
      continue;
    }
    bool truncated = false;
    for (std::size_t k = 0; k < enabled.size(); ++k) {
      auto r = engine.fire(g.states[id], enabled[k]);
      auto target = intern(std::move(r.state), g.depth[id] + 1, fresh);
      if (!target) {
        truncated = true;
        continue;
      }
      g.edges.push_back({id, *target, enabled[k].transition, k, std::move(r.events)});
      if (fresh) frontier.emplace_back(*target, std::move(r.enabled));
    }
    if (truncated) {
      g.limit_exceeded = true;
      g.unexpanded.push_back(id);
    }
  }
  std::sort(g.terminals.begin(), g.terminals.end());
  std::sort(g.deadlocks.begin(), g.deadlocks.end());
  std::sort(g.unexpanded.begin(), g.unexpanded.end());
  // Edges were appended in BFS order; keep them grouped by source.
  std::stable_sort(g.edges.begin(), g.edges.end(),
                   [](const GraphEdge& a, const GraphEdge& b) { return a.from < b.from; });
  return g;
}

Orderings event_orderings(const StateGraph& g, const EventProjection& projection) {
  Orderings result;
  if (g.states.empty()) return result;

  // Sequences as interned cons cells: id 0 is the empty sequence.
  std::vector<std::pair<Value, std::uint32_t>> cells{{Value(), 0}};
  std::map<std::pair<Value, std::uint32_t>, std::uint32_t> cell_ids;
  auto cons = [&](const Value& head, std::uint32_t tail) {
    auto key = std::make_pair(head, tail);
    auto it = cell_ids.find(key);
    if (it != cell_ids.end()) return it->second;
    auto id = static_cast<std::uint32_t>(cells.size());
    cells.push_back(key);
    cell_ids.emplace(std::move(key), id);
    return id;
  };

  std::vector<std::vector<Value>> projected(g.edges.size());
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    for (const auto& ev : g.edges[e].events) {
      if (auto p = projection(ev)) projected[e].push_back(*p);
    }
  }

  enum : std::uint8_t { White, Grey, Black };
  std::vector<std::uint8_t> colour(g.states.size(), White);
  std::vector<std::vector<std::uint32_t>> suffixes(g.states.size());
  std::vector<std::size_t> first_edge(g.states.size() + 1, g.edges.size());
  for (std::size_t e = g.edges.size(); e-- > 0;) first_edge[g.edges[e].from] = e;
  for (std::size_t s = g.states.size(); s-- > 0;) {
    if (first_edge[s] == g.edges.size() || g.edges[first_edge[s]].from != s) {
      first_edge[s] = first_edge[s + 1];
    }
  }

  struct Frame {
    std::size_t state;
    std::size_t next_edge;
  };
  std::vector<Frame> stack{{0, first_edge[0]}};
  colour[0] = Grey;
  while (!stack.empty()) {
    auto& f = stack.back();
    if (f.next_edge < g.edges.size() && g.edges[f.next_edge].from == f.state) {
      const auto& e = g.edges[f.next_edge++];
      if (colour[e.to] == White) {
        colour[e.to] = Grey;
        stack.push_back({e.to, first_edge[e.to]});
      } else if (colour[e.to] == Grey) {
        result.cyclic = true;
      }
      continue;
    }
    // All successors done: combine.
    std::size_t s = f.state;
    std::vector<std::uint32_t> acc;
    bool any = false;
    for (std::size_t e = first_edge[s]; e < g.edges.size() && g.edges[e].from == s; ++e) {
      const auto& edge = g.edges[e];
      if (colour[edge.to] != Black) continue;  // back edge
      any = true;
      for (auto tail : suffixes[edge.to]) {
        auto id = tail;
        for (auto it = projected[e].rbegin(); it != projected[e].rend(); ++it) id = cons(*it, id);
        acc.push_back(id);
      }
    }
    if (!any) acc.push_back(0);
    std::sort(acc.begin(), acc.end());
    acc.erase(std::unique(acc.begin(), acc.end()), acc.end());
    suffixes[s] = std::move(acc);
    colour[s] = Black;
    stack.pop_back();
  }

  for (auto id : suffixes[0]) {
    std::vector<Value> seq;
    while (id != 0) {
      seq.push_back(cells[id].first);
      id = cells[id].second;
    }
    result.sequences.insert(std::move(seq));
  }
  return result;
}

}  // namespace mpnet::engine
