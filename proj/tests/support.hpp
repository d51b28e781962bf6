#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mpnet/engine.hpp"
#include "mpnet/mpi.hpp"
#include "mpnet/net.hpp"
#include "oracles/mpi_oracle.hpp"
#include "oracles/pt_oracle.hpp"

namespace support {

std::string source_path(const std::string& relative);
std::string read_file(const std::string& path);

/// samples/allsendone_v<variant>.mpl expanded for n ranks.
mpnet::net::MPNet all_send_one(int variant, int n);

struct Built {
  std::shared_ptr<const mpnet::net::FlatNet> net;
  std::unique_ptr<mpnet::engine::Engine> engine;
};
Built build(const mpnet::net::MPNet& net);

/// Event orderings of the broker `src` field.
mpnet::engine::Orderings source_orderings(const mpnet::engine::StateGraph& g);
std::set<std::vector<mpnet::Value>> to_values(const std::set<std::vector<int>>& s);
std::set<std::vector<mpnet::Value>> permutations(int n);

/// Request tokens in ASR (queue and depository) with op = recv, destination = `rank`.
std::size_t live_recvs(const mpnet::engine::SimState& s, const mpnet::net::FlatNet& net, std::uint64_t rank);

/// Every edge firing a transition with read-only input arcs leaves those
/// places' token multisets unchanged. Returns the number of such edges
/// checked, or -1 on a violation.
long check_read_only(const mpnet::engine::StateGraph& g, const mpnet::net::FlatNet& net);

/// Every broker match takes the oldest pending send of its envelope and the
/// oldest pending receive of its (source, destination, tag). Returns the
/// number of match edges checked, or -1 on a violation.
long check_non_overtaking(const mpnet::engine::StateGraph& g, const mpnet::net::FlatNet& net);

// Hand-built nets.
mpnet::net::Place place(std::string name,
                        mpnet::net::PlaceKind kind = mpnet::net::PlaceKind::Multiset,
                        std::optional<std::string> compound = {},
                        std::vector<mpnet::Value> initial = {});
mpnet::net::Transition transition(std::string name, const std::string& event = {});
mpnet::net::Arc in(std::string place, std::string tr, const std::string& text,
                   mpnet::net::ArcCategory c = mpnet::net::ArcCategory::In);
mpnet::net::Arc out(std::string tr, std::string place, const std::string& text);
mpnet::net::Arc cf(std::string from, std::string to);
mpnet::net::Area area(std::uint64_t address, mpnet::net::CommunicationNet cn);
/// One-area net at address 0.
mpnet::net::MPNet single(mpnet::net::CommunicationNet cn);

/// P/T net as a unit-coloured multiset net in one area.
mpnet::net::MPNet to_mpnet(const oracle::PTNet& pt);
/// Markings reachable in at most `depth` steps, via explore.
std::set<oracle::Marking> engine_reach(const oracle::PTNet& pt, std::size_t depth);
oracle::Marking marking_of(const mpnet::engine::SimState& s, const mpnet::net::FlatNet& net,
                           std::size_t places);

}  // namespace support
