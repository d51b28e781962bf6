#include "mpi_oracle.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace oracle {

namespace {

struct Request {
  bool send;
  int owner;
  int peer;
  int tag;
  int id;        // global posting order
  bool done = false;
  auto key() const { return std::tie(send, owner, peer, tag, id, done); }
  bool operator<(const Request& o) const { return key() < o.key(); }
  bool operator==(const Request& o) const { return key() == o.key(); }
};

struct Rank {
  std::size_t pc = 0;
  std::vector<int> handles;  // non-blocking requests not yet waited for
  std::vector<int> blocked;  // requests a blocking call waits on
  auto key() const { return std::tie(pc, handles, blocked); }
  bool operator<(const Rank& o) const { return key() < o.key(); }
};

struct State {
  std::vector<Rank> ranks;
  std::vector<Request> requests;
  std::vector<int> received;  // matched sources, by matching order (rank 0's view)
  bool operator<(const State& o) const {
    return std::tie(ranks, requests, received) < std::tie(o.ranks, o.requests, o.received);
  }
};

bool envelope_matches(const Request& s, const Request& r) {
  return s.peer == r.owner && s.tag == r.tag && (r.peer == kAnySource || r.peer == s.owner);
}

class Enumerator {
 public:
  explicit Enumerator(const std::vector<Script>& scripts) : scripts_(scripts) {}

  Result run() {
    State s0;
    s0.ranks.resize(scripts_.size());
    explore(s0);
    result_.states = seen_.size();
    return result_;
  }

 private:
  const Request* find(const State& s, int id) const {
    for (const auto& r : s.requests) {
      if (r.id == id) return &r;
    }
    return nullptr;
  }

  bool all_done(const State& s, const std::vector<int>& ids) const {
    return std::all_of(ids.begin(), ids.end(), [&](int id) { return find(s, id)->done; });
  }

  void explore(const State& s) {
    if (!seen_.insert(s).second) return;
    std::size_t pending_recvs = 0;
    for (const auto& r : s.requests) pending_recvs += !r.send && !r.done;
    result_.max_pending_recvs = std::max(result_.max_pending_recvs, pending_recvs);

    bool moved = false;
    // Local steps of each rank.
    for (std::size_t k = 0; k < s.ranks.size(); ++k) {
      const Rank& rk = s.ranks[k];
      if (!rk.blocked.empty()) {
        if (all_done(s, rk.blocked)) {
          State t = s;
          t.ranks[k].blocked.clear();
          ++t.ranks[k].pc;
          moved = true;
          explore(t);
        }
        continue;
      }
      if (rk.pc >= scripts_[k].size()) continue;
      const Op& op = scripts_[k][rk.pc];
      State t = s;
      Rank& tr = t.ranks[k];
      if (op.kind == Op::WaitAll) {
        tr.blocked = tr.handles;
        tr.handles.clear();
      } else {
        Request r;
        r.send = op.kind == Op::Send || op.kind == Op::Isend;
        r.owner = static_cast<int>(k);
        r.peer = op.peer;
        r.tag = op.tag;
        r.id = static_cast<int>(t.requests.size());
        t.requests.push_back(r);
        if (op.kind == Op::Send || op.kind == Op::Recv) {
          tr.blocked = {r.id};
        } else {
          tr.handles.push_back(r.id);
          ++tr.pc;
        }
      }
      moved = true;
      explore(t);
    }
    // Matches allowed by MPI's ordering rules.
    for (const auto& r : s.requests) {
      if (r.send || r.done) continue;
      for (const auto& snd : s.requests) {
        if (!snd.send || snd.done || !envelope_matches(snd, r)) continue;
        bool earlier_send = std::any_of(s.requests.begin(), s.requests.end(), [&](const Request& o) {
          return o.send && !o.done && o.owner == snd.owner && o.id < snd.id && envelope_matches(o, r);
        });
        bool earlier_recv = std::any_of(s.requests.begin(), s.requests.end(), [&](const Request& o) {
          return !o.send && !o.done && o.owner == r.owner && o.id < r.id && envelope_matches(snd, o);
        });
        if (earlier_send || earlier_recv) continue;
        for (const auto& o : s.requests) {
          // A completed send posted later with the same envelope means overtaking.
          if (o.send && o.done && o.owner == snd.owner && o.peer == snd.peer && o.tag == snd.tag &&
              o.id > snd.id) {
            result_.overtaking = true;
          }
        }
        State t = s;
        for (auto& q : t.requests) {
          if (q.id == r.id || q.id == snd.id) q.done = true;
        }
        t.received.push_back(snd.owner);
        moved = true;
        explore(t);
      }
    }
    if (!moved) {
      bool finished = true;
      for (std::size_t k = 0; k < s.ranks.size(); ++k) {
        finished = finished && s.ranks[k].pc >= scripts_[k].size() && s.ranks[k].blocked.empty();
      }
      if (finished) {
        result_.orderings.insert(s.received);
      } else {
        ++result_.deadlocks;
      }
    }
  }

  const std::vector<Script>& scripts_;
  std::set<State> seen_;
  Result result_;
};

std::vector<Script> senders(int n) {
  std::vector<Script> s(n);
  for (int r = 1; r < n; ++r) s[r] = {{Op::Send, 0, 0}};
  return s;
}

}  // namespace

Result enumerate(const std::vector<Script>& ranks) { return Enumerator(ranks).run(); }

std::vector<Script> all_send_one_v1(int n) {
  auto s = senders(n);
  for (int i = 1; i < n; ++i) s[0].push_back({Op::Recv, i, 0});
  return s;
}

std::vector<Script> all_send_one_v2(int n) {
  auto s = senders(n);
  for (int i = 1; i < n; ++i) s[0].push_back({Op::Recv, kAnySource, 0});
  return s;
}

std::vector<Script> all_send_one_v3(int n) {
  auto s = senders(n);
  for (int i = 1; i < n; ++i) s[0].push_back({Op::Irecv, kAnySource, 0});
  s[0].push_back({Op::WaitAll});
  return s;
}

}  // namespace oracle
