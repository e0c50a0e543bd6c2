#pragma once

#include <span>
#include <vector>

#include "sg/model.hpp"

namespace sg {

struct Node {
  int id = 0;
  int primitive = 0;
  SubSelector sel = SubSelector::None;  // None for the primitive node itself

  bool is_sub() const { return sel != SubSelector::None; }
  bool operator==(const Node&) const = default;
};

enum class EdgeKind { Constraint, SubPrimitiveLink };

struct Edge {
  int id = 0;
  int constraint = -1;  // index into Sketch::constraints; -1 for links
  std::vector<int> members;
  EdgeKind kind = EdgeKind::Constraint;

  bool is_loop() const { return members.size() == 1; }
  bool operator==(const Edge&) const = default;
};

/// Multi-hypergraph over primitive and sub-primitive nodes. Node ids are
/// assigned primitive-first in insertion order, each primitive's sub-nodes
/// directly after it.
class ConstraintGraph {
 public:
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::span<const int> incident(int node) const { return incidence_[node]; }

  std::size_t primitive_count() const { return primitiveNode_.size(); }
  int primitive_node(int primitive) const { return primitiveNode_[primitive]; }
  /// Node for a reference; throws DanglingReference if the selector has no node.
  int node_of(EntityRef ref) const;
  int constraint_edge(int constraint) const { return constraintEdge_[constraint]; }

  /// Distinct primitives touched by an edge, sub-nodes collapsed to parents.
  std::vector<int> member_primitives(const Edge& e) const;

  bool operator==(const ConstraintGraph&) const = default;

 private:
  friend ConstraintGraph build_graph(const Sketch& s);

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> incidence_;
  std::vector<int> primitiveNode_;
  std::vector<int> constraintEdge_;
};

ConstraintGraph build_graph(const Sketch& s);

struct AdjacencyRate {
  double adjacentRate = 0.0;
  double randomBaseline = 0.0;
};

/// Fraction of consecutive primitives in `order` sharing a constraint edge,
/// against the same fraction over all unordered primitive pairs. With
/// collapseSubNodes false, only edges joining the primitive nodes themselves
/// count.
AdjacencyRate order_adjacency_rate(const ConstraintGraph& g, std::span<const int> order,
                                   bool collapseSubNodes = true);

struct PositionDegree {
  int position = 0;
  double meanDegree = 0.0;
  long count = 0;
  bool operator==(const PositionDegree&) const = default;
};

/// Streaming accumulator for mean constraint degree per sequence position.
class DegreeByPosition {
 public:
  void add(const ConstraintGraph& g, std::span<const int> order);
  void merge(const DegreeByPosition& other);
  std::vector<PositionDegree> result() const;

 private:
  std::vector<double> sum_;
  std::vector<long> count_;
};

struct GraphOrder {
  const ConstraintGraph* graph;
  std::vector<int> order;
};

std::vector<PositionDegree> degree_by_position(std::span<const GraphOrder> corpus);

/// Number of constraint edges touching the primitive or any of its sub-nodes.
int constraint_degree(const ConstraintGraph& g, int primitive);

}  // namespace sg
