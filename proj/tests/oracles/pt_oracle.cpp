#include "pt_oracle.hpp"

namespace oracle {

bool PTNet::enabled(const Marking& m, std::size_t t) const {
  for (std::size_t p = 0; p < places; ++p) {
    if (m[p] < pre[t][p]) return false;
  }
  return true;
}

Marking PTNet::fire(const Marking& m, std::size_t t) const {
  Marking out = m;
  for (std::size_t p = 0; p < places; ++p) out[p] = out[p] - pre[t][p] + post[t][p];
  return out;
}

std::vector<std::set<Marking>> reachable(const PTNet& net, std::size_t depth) {
  std::vector<std::set<Marking>> reach{{net.initial}};
  std::set<Marking> frontier{net.initial};
  for (std::size_t k = 1; k <= depth; ++k) {
    std::set<Marking> next;
    for (const auto& m : frontier) {
      for (std::size_t t = 0; t < net.pre.size(); ++t) {
        if (net.enabled(m, t)) next.insert(net.fire(m, t));
      }
    }
    auto all = reach.back();
    all.insert(next.begin(), next.end());
    reach.push_back(std::move(all));
    frontier = std::move(next);
  }
  return reach;
}

PTNet random_net(std::mt19937_64& rng, std::size_t max_places, std::size_t max_transitions,
                 std::uint32_t max_weight) {
  auto pick = [&](std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
  };
  PTNet net;
  net.places = pick(1, max_places);
  std::size_t transitions = pick(1, max_transitions);
  auto weight = [&] {
    // Sparse arcs: half of the pairs carry no arc.
    return pick(0, 1) ? static_cast<std::uint32_t>(pick(1, max_weight)) : 0u;
  };
  for (std::size_t t = 0; t < transitions; ++t) {
    std::vector<std::uint32_t> pre(net.places), post(net.places);
    for (auto& w : pre) w = weight();
    for (auto& w : post) w = weight();
    net.pre.push_back(pre);
    net.post.push_back(post);
  }
  net.initial.resize(net.places);
  for (auto& m : net.initial) m = static_cast<std::uint32_t>(pick(0, max_weight));
  return net;
}

}  // namespace oracle
