#include "sg/graph.hpp"

#include <algorithm>

namespace sg {

int ConstraintGraph::node_of(EntityRef ref) const {
  if (ref.primitive < 0 || ref.primitive >= static_cast<int>(primitiveNode_.size()))
    throw Error(ErrorCode::DanglingReference, "primitive " + std::to_string(ref.primitive));
  const int base = primitiveNode_[ref.primitive];
  if (ref.sel == SubSelector::None) return base;
  for (int j = base + 1; j < static_cast<int>(nodes_.size()) && nodes_[j].primitive == ref.primitive; ++j)
    if (nodes_[j].sel == ref.sel) return j;
  throw Error(ErrorCode::DanglingReference,
              "primitive " + std::to_string(ref.primitive) + " has no '" + std::string(to_string(ref.sel)) + "'");
}

std::vector<int> ConstraintGraph::member_primitives(const Edge& e) const {
  std::vector<int> out;
  out.reserve(e.members.size());
  for (int m : e.members) out.push_back(nodes_[m].primitive);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ConstraintGraph build_graph(const Sketch& s) {
  validate_sketch(s);
  ConstraintGraph g;
  auto addEdge = [&](Edge e) {
    e.id = static_cast<int>(g.edges_.size());
    for (int m : e.members) {
      auto& inc = g.incidence_[m];
      if (inc.empty() || inc.back() != e.id) inc.push_back(e.id);
    }
    g.edges_.push_back(std::move(e));
  };

  g.primitiveNode_.reserve(s.primitives.size());
  for (std::size_t i = 0; i < s.primitives.size(); ++i) {
    const int prim = static_cast<int>(i);
    const int parent = static_cast<int>(g.nodes_.size());
    g.primitiveNode_.push_back(parent);
    g.nodes_.push_back({parent, prim, SubSelector::None});
    g.incidence_.emplace_back();
    for (auto sel : sub_selectors(s.primitives[i].type())) {
      const int id = static_cast<int>(g.nodes_.size());
      g.nodes_.push_back({id, prim, sel});
      g.incidence_.emplace_back();
      addEdge({0, -1, {parent, id}, EdgeKind::SubPrimitiveLink});
    }
  }

  g.constraintEdge_.reserve(s.constraints.size());
  for (std::size_t ci = 0; ci < s.constraints.size(); ++ci) {
    Edge e{0, static_cast<int>(ci), {}, EdgeKind::Constraint};
    for (const auto& ref : s.constraints[ci].locals) e.members.push_back(g.node_of(ref));
    g.constraintEdge_.push_back(static_cast<int>(g.edges_.size()));
    addEdge(std::move(e));
  }
  return g;
}

namespace {

// Symmetric primitive adjacency through constraint edges.
std::vector<std::vector<char>> primitive_adjacency(const ConstraintGraph& g, bool collapse) {
  const auto n = g.primitive_count();
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  for (const auto& e : g.edges()) {
    if (e.kind != EdgeKind::Constraint) continue;
    std::vector<int> prims;
    if (collapse) {
      prims = g.member_primitives(e);
    } else {
      for (int m : e.members)
        if (!g.nodes()[m].is_sub()) prims.push_back(g.nodes()[m].primitive);
    }
    for (int a : prims)
      for (int b : prims)
        if (a != b) adj[a][b] = 1;
  }
  return adj;
}

}  // namespace

AdjacencyRate order_adjacency_rate(const ConstraintGraph& g, std::span<const int> order,
                                   bool collapseSubNodes) {
  const auto n = g.primitive_count();
  if (n < 2) throw Error(ErrorCode::EmptyGraph, "need at least two primitives");
  if (order.size() != n) throw Error(ErrorCode::InconsistentSequence, "order is not a permutation");
  std::vector<char> seen(n, 0);
  for (int p : order) {
    if (p < 0 || p >= static_cast<int>(n) || seen[p])
      throw Error(ErrorCode::InconsistentSequence, "order is not a permutation");
    seen[p] = 1;
  }

  const auto adj = primitive_adjacency(g, collapseSubNodes);
  long consecutive = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) consecutive += adj[order[i]][order[i + 1]];
  long pairs = 0, linked = 0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      ++pairs;
      linked += adj[a][b];
    }
  return {static_cast<double>(consecutive) / static_cast<double>(n - 1),
          static_cast<double>(linked) / static_cast<double>(pairs)};
}

int constraint_degree(const ConstraintGraph& g, int primitive) {
  std::vector<int> edges;
  const int base = g.primitive_node(primitive);
  for (int j = base; j < static_cast<int>(g.nodes().size()) && g.nodes()[j].primitive == primitive; ++j)
    for (int e : g.incident(j))
      if (g.edges()[e].kind == EdgeKind::Constraint) edges.push_back(e);
  std::sort(edges.begin(), edges.end());
  return static_cast<int>(std::unique(edges.begin(), edges.end()) - edges.begin());
}

void DegreeByPosition::add(const ConstraintGraph& g, std::span<const int> order) {
  if (sum_.size() < order.size()) {
    sum_.resize(order.size(), 0.0);
    count_.resize(order.size(), 0);
  }
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    sum_[pos] += constraint_degree(g, order[pos]);
    ++count_[pos];
  }
}

void DegreeByPosition::merge(const DegreeByPosition& other) {
  if (sum_.size() < other.sum_.size()) {
    sum_.resize(other.sum_.size(), 0.0);
    count_.resize(other.sum_.size(), 0);
  }
  for (std::size_t i = 0; i < other.sum_.size(); ++i) {
    sum_[i] += other.sum_[i];
    count_[i] += other.count_[i];
  }
}

std::vector<PositionDegree> DegreeByPosition::result() const {
  std::vector<PositionDegree> out;
  for (std::size_t i = 0; i < sum_.size(); ++i)
    if (count_[i] > 0)
      out.push_back({static_cast<int>(i), sum_[i] / static_cast<double>(count_[i]), count_[i]});
  return out;
}

std::vector<PositionDegree> degree_by_position(std::span<const GraphOrder> corpus) {
  DegreeByPosition acc;
  for (const auto& item : corpus) acc.add(*item.graph, item.order);
  return acc.result();
}

}  // namespace sg
