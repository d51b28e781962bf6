#include "mpnet/queue.hpp"

#include <algorithm>

#include "mpnet/error.hpp"

namespace mpnet::queue {

const char* to_string(Head h) { return h == Head::Single ? "single" : "double"; }

Value identity(const Value& v, ServiceKey key) { return project(v, key); }

QueueState enqueue(QueueState q, const Value& v, Color color) {
  if (!admits(color, v)) {
    throw Error(ErrorKind::ColorMismatch,
                to_string(v) + " is not admissible under colour " + to_string(color));
  }
  q.push_back(v);
  return q;
}

std::uint64_t token_count(const QueueState& q, const Value& v) {
  return static_cast<std::uint64_t>(std::count(q.begin(), q.end(), v));
}

std::uint64_t depository_count(const Depository& d, const Value& v, ServiceKey key) {
  if (key.empty()) {
    auto it = d.find(v);
    return it == d.end() ? 0 : it->second;
  }
  Value id = identity(v, key);
  std::uint64_t n = 0;
  for (const auto& [tok, count] : d) {
    if (identity(tok, key) == id) n += count;
  }
  return n;
}

bool can_serve_single(const QueueState& q, const Depository& d, const Value& v, ServiceKey) {
  return d.empty() && !q.empty() && q.front() == v;
}

bool can_serve_double(const QueueState& q, const Depository& d, const Value& v, ServiceKey key) {
  return service_index(q, d, v, Head::Double, key).has_value();
}

std::optional<std::size_t> service_index(const QueueState& q, const Depository& d, const Value& v,
                                         Head head, ServiceKey key) {
  if (head == Head::Single) {
    if (can_serve_single(q, d, v, key)) return 0;
    return std::nullopt;
  }
  if (depository_count(d, v, key) != 0) return std::nullopt;
  // The first token with v's identity must be v itself.
  Value id = identity(v, key);
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (identity(q[i], key) == id) {
      if (q[i] == v) return i;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::vector<std::size_t> serviceable(const QueueState& q, const Depository& d, Head head,
                                     ServiceKey key) {
  std::vector<std::size_t> out;
  if (head == Head::Single) {
    if (d.empty() && !q.empty()) out.push_back(0);
    return out;
  }
  std::vector<Value> seen;
  for (std::size_t i = 0; i < q.size(); ++i) {
    Value id = identity(q[i], key);
    if (std::find(seen.begin(), seen.end(), id) != seen.end()) continue;
    seen.push_back(id);
    if (depository_count(d, q[i], key) == 0) out.push_back(i);
  }
  return out;
}

std::pair<QueueState, Depository> serve(QueueState q, Depository d, const Value& v, Head head,
                                        ServiceKey key) {
  auto idx = service_index(q, d, v, head, key);
  if (!idx) {
    throw Error(ErrorKind::NotServiceable,
                to_string(v) + " cannot be served under " + to_string(head) + "-headed service");
  }
  q.erase(q.begin() + static_cast<std::ptrdiff_t>(*idx));
  ++d[v];
  return {std::move(q), std::move(d)};
}

void schedule(QueueState& q, Depository& d, const Demand& demand, Head head, ServiceKey key) {
  if (demand.universal) {
    while (true) {
      auto idx = serviceable(q, d, head, key);
      if (idx.empty()) return;
      // Serve back to front so earlier indices stay valid.
      for (auto it = idx.rbegin(); it != idx.rend(); ++it) {
        ++d[q[*it]];
        q.erase(q.begin() + static_cast<std::ptrdiff_t>(*it));
      }
    }
  }
  std::vector<Value> wanted = demand.values;
  std::sort(wanted.begin(), wanted.end());
  wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
  bool progress = true;
  while (progress) {
    progress = false;
    for (const auto& v : wanted) {
      if (auto idx = service_index(q, d, v, head, key)) {
        q.erase(q.begin() + static_cast<std::ptrdiff_t>(*idx));
        ++d[v];
        progress = true;
      }
    }
  }
}

}  // namespace mpnet::queue
