#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "atom/hash.hpp"

namespace atom {

struct DirectedLink {
  std::string src;
  std::string dst;

  friend bool operator==(const DirectedLink&, const DirectedLink&) = default;
};

/// Nodes plus an ordered list of directed links. The link order is the
/// canonical link index used for tensor columns, file layout and the
/// per-bin coding order.
class Topology {
 public:
  Topology() = default;
  /// Validates endpoints and rejects duplicate links.
  Topology(std::string name, std::vector<std::string> nodes, std::vector<DirectedLink> links);

  const std::string& name() const noexcept { return name_; }
  const std::vector<std::string>& nodes() const noexcept { return nodes_; }
  const std::vector<DirectedLink>& links() const noexcept { return links_; }
  std::size_t numLinks() const noexcept { return links_.size(); }
  std::size_t numNodes() const noexcept { return nodes_.size(); }

  /// Line-oriented text form: `name`, `node`, `link` records in order.
  std::string serialize() const;
  static Topology parse(std::istream& in, const std::string& sourceName = "<stream>");
  static Topology load(const std::string& path);
  void save(const std::string& path) const;

  /// Hash over the full canonical serialization.
  Digest hash() const;
  /// Hash over the ordered link list only.
  Digest linkOrderHash() const;

 private:
  std::string name_;
  std::vector<std::string> nodes_;
  std::vector<DirectedLink> links_;
};

/// Line graph over directed links. Two links are neighbours iff they share
/// an endpoint node; the relation is symmetric and has no self-loops.
class LinkGraph {
 public:
  LinkGraph() = default;
  explicit LinkGraph(std::vector<std::vector<std::size_t>> neighbors);

  std::size_t numLinks() const noexcept { return neighbors_.size(); }
  const std::vector<std::size_t>& neighbors(std::size_t link) const { return neighbors_.at(link); }
  const std::vector<std::vector<std::size_t>>& adjacency() const noexcept { return neighbors_; }
  std::size_t numEdges() const noexcept;

  /// Graph whose link i is this graph's link perm[i].
  LinkGraph permuted(const std::vector<std::size_t>& perm) const;

  friend bool operator==(const LinkGraph&, const LinkGraph&) = default;

 private:
  std::vector<std::vector<std::size_t>> neighbors_;
};

LinkGraph buildLinkGraph(const Topology& topology);

/// A graph with `numLinks` links and no edges.
LinkGraph isolatedLinks(std::size_t numLinks);

}  // namespace atom
