#ifndef SZM_SCP_HPP
#define SZM_SCP_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "szm/ordinal.hpp"

namespace szm {

// Size-change information, ordered by informativeness Less > Leq > Unknown.
enum class SCEntry : uint8_t { Less, Leq, Unknown };

SCEntry sc_combine(SCEntry a, SCEntry b);  // sequential composition
SCEntry sc_best(SCEntry a, SCEntry b);     // pick the more informative

// rows = source-sequent parameter count, cols = target parameter count;
// entry (i,j) relates target parameter j to source parameter i.
class SCMatrix {
 public:
  SCMatrix() = default;
  SCMatrix(int rows, int cols, SCEntry fill = SCEntry::Unknown);
  static SCMatrix identity(int n);  // Leq diagonal, Unknown elsewhere

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  SCEntry at(int i, int j) const { return e_[i * cols_ + j]; }
  void set(int i, int j, SCEntry v) { e_[i * cols_ + j] = v; }

  bool operator==(const SCMatrix& o) const = default;
  bool has_less_diagonal() const;
  std::string dump() const;  // grid of '<', '=', '?'

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<SCEntry> e_;
};

SCMatrix compose(const SCMatrix& m1, const SCMatrix& m2);

// Entry (i,j) = Less if args_dst[j] < args_src[i] in g, Leq if <=, else
// Unknown.
SCMatrix edge_matrix(const PosCtx& g, const std::vector<OrdPtr>& args_src,
                     const std::vector<OrdPtr>& args_dst);

struct CallGraph {
  struct Edge {
    int src = 0, dst = 0;
    SCMatrix mat;
    bool operator==(const Edge& o) const = default;
  };
  std::vector<int> arity;  // node id -> parameter count
  std::vector<Edge> edges;

  int add_node(int ar) {
    arity.push_back(ar);
    return static_cast<int>(arity.size()) - 1;
  }
  void add_edge(int src, int dst, SCMatrix m) {
    edges.push_back({src, dst, std::move(m)});
  }
};

struct WfVerdict {
  bool accepted = true;
  int node = -1;        // offending node when rejected
  SCMatrix witness;     // its idempotent loop matrix without a Less diagonal
};

// Saturates the graph under composition and accepts iff every idempotent
// self-loop matrix has a strict decrease on its diagonal.
WfVerdict check_well_founded(const CallGraph& g);

}  // namespace szm

#endif
