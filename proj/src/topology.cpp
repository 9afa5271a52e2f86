#include "atom/topology.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "atom/error.hpp"

namespace atom {

Topology::Topology(std::string name, std::vector<std::string> nodes, std::vector<DirectedLink> links)
    : name_(std::move(name)), nodes_(std::move(nodes)), links_(std::move(links)) {
  std::set<std::string> nodeSet;
  for (const auto& n : nodes_) {
    if (n.empty()) throw AtomError(ErrorCode::InvalidTopology, "empty node id");
    if (!nodeSet.insert(n).second) {
      throw AtomError(ErrorCode::InvalidTopology, "duplicate node '" + n + "'");
    }
  }
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const auto& l = links_[i];
    if (!nodeSet.contains(l.src) || !nodeSet.contains(l.dst)) {
      throw AtomError(ErrorCode::InvalidTopology,
                      "link " + std::to_string(i) + " (" + l.src + " -> " + l.dst +
                          ") references an unknown node");
    }
    if (l.src == l.dst) {
      throw AtomError(ErrorCode::InvalidTopology, "link " + std::to_string(i) + " is a self-loop");
    }
    if (!seen.emplace(l.src, l.dst).second) {
      throw AtomError(ErrorCode::InvalidTopology,
                      "duplicate link " + l.src + " -> " + l.dst);
    }
  }
}

std::string Topology::serialize() const {
  std::ostringstream out;
  if (!name_.empty()) out << "name " << name_ << '\n';
  for (const auto& n : nodes_) out << "node " << n << '\n';
  for (const auto& l : links_) out << "link " << l.src << ' ' << l.dst << '\n';
  return out.str();
}

Topology Topology::parse(std::istream& in, const std::string& sourceName) {
  std::string name;
  std::vector<std::string> nodes;
  std::vector<DirectedLink> links;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string kind;
    if (!(fields >> kind)) continue;
    auto where = [&] { return sourceName + ":" + std::to_string(lineNo); };
    if (kind == "name") {
      fields >> name;
    } else if (kind == "node") {
      std::string id;
      if (!(fields >> id)) throw AtomError(ErrorCode::ParseError, where() + ": node without id");
      nodes.push_back(id);
    } else if (kind == "link") {
      DirectedLink l;
      if (!(fields >> l.src >> l.dst)) {
        throw AtomError(ErrorCode::ParseError, where() + ": link needs <src> <dst>");
      }
      links.push_back(std::move(l));
    } else {
      throw AtomError(ErrorCode::ParseError, where() + ": unknown record '" + kind + "'");
    }
    std::string extra;
    if (fields >> extra) {
      throw AtomError(ErrorCode::ParseError, where() + ": trailing field '" + extra + "'");
    }
  }
  return Topology(std::move(name), std::move(nodes), std::move(links));
}

Topology Topology::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw AtomError(ErrorCode::IoError, "cannot open topology file '" + path + "'");
  return parse(in, path);
}

void Topology::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw AtomError(ErrorCode::IoError, "cannot write topology file '" + path + "'");
  out << serialize();
}

Digest Topology::hash() const { return sha256(serialize()); }

Digest Topology::linkOrderHash() const {
  std::string s;
  for (const auto& l : links_) {
    s += l.src;
    s += '\0';
    s += l.dst;
    s += '\n';
  }
  return sha256(s);
}

LinkGraph::LinkGraph(std::vector<std::vector<std::size_t>> neighbors)
    : neighbors_(std::move(neighbors)) {
  const auto n = neighbors_.size();
  for (std::size_t i = 0; i < n; ++i) {
    auto& list = neighbors_[i];
    std::sort(list.begin(), list.end());
    if (std::adjacent_find(list.begin(), list.end()) != list.end()) {
      throw AtomError(ErrorCode::InvalidTopology, "duplicate neighbour of link " + std::to_string(i));
    }
    for (auto j : list) {
      if (j >= n || j == i) {
        throw AtomError(ErrorCode::InvalidTopology, "bad neighbour index for link " + std::to_string(i));
      }
    }
  }
}

std::size_t LinkGraph::numEdges() const noexcept {
  std::size_t total = 0;
  for (const auto& l : neighbors_) total += l.size();
  return total / 2;
}

LinkGraph LinkGraph::permuted(const std::vector<std::size_t>& perm) const {
  const auto n = neighbors_.size();
  if (perm.size() != n) throw AtomError(ErrorCode::ShapeMismatch, "permutation size");
  std::vector<std::size_t> inverse(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (perm[i] >= n || inverse[perm[i]] != n) {
      throw AtomError(ErrorCode::InvalidArgument, "not a permutation");
    }
    inverse[perm[i]] = i;
  }
  std::vector<std::vector<std::size_t>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto k : neighbors_[perm[i]]) out[i].push_back(inverse[k]);
  }
  return LinkGraph(std::move(out));
}

LinkGraph buildLinkGraph(const Topology& topology) {
  const auto& links = topology.links();
  if (links.empty()) throw AtomError(ErrorCode::InvalidTopology, "topology has no links");
  // node -> incident link indices, in link order
  std::unordered_map<std::string, std::vector<std::size_t>> incident;
  for (std::size_t i = 0; i < links.size(); ++i) {
    incident[links[i].src].push_back(i);
    incident[links[i].dst].push_back(i);
  }
  std::vector<std::vector<std::size_t>> neighbors(links.size());
  for (std::size_t i = 0; i < links.size(); ++i) {
    std::vector<std::size_t> acc;
    for (const auto* node : {&links[i].src, &links[i].dst}) {
      for (auto j : incident[*node]) {
        if (j != i) acc.push_back(j);
      }
    }
    std::sort(acc.begin(), acc.end());
    acc.erase(std::unique(acc.begin(), acc.end()), acc.end());
    neighbors[i] = std::move(acc);
  }
  return LinkGraph(std::move(neighbors));
}

LinkGraph isolatedLinks(std::size_t numLinks) {
  return LinkGraph(std::vector<std::vector<std::size_t>>(numLinks));
}

}  // namespace atom
