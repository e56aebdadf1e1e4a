#include "szm/scp.hpp"

#include <set>
#include <stdexcept>

namespace szm {

SCEntry sc_combine(SCEntry a, SCEntry b) {
  if (a == SCEntry::Unknown || b == SCEntry::Unknown) return SCEntry::Unknown;
  if (a == SCEntry::Less || b == SCEntry::Less) return SCEntry::Less;
  return SCEntry::Leq;
}

SCEntry sc_best(SCEntry a, SCEntry b) {
  if (a == SCEntry::Less || b == SCEntry::Less) return SCEntry::Less;
  if (a == SCEntry::Leq || b == SCEntry::Leq) return SCEntry::Leq;
  return SCEntry::Unknown;
}

SCMatrix::SCMatrix(int rows, int cols, SCEntry fill)
    : rows_(rows), cols_(cols), e_(static_cast<size_t>(rows) * cols, fill) {}

SCMatrix SCMatrix::identity(int n) {
  SCMatrix m(n, n);
  for (int i = 0; i < n; ++i) m.set(i, i, SCEntry::Leq);
  return m;
}

bool SCMatrix::has_less_diagonal() const {
  int n = rows_ < cols_ ? rows_ : cols_;
  for (int i = 0; i < n; ++i)
    if (at(i, i) == SCEntry::Less) return true;
  return false;
}

std::string SCMatrix::dump() const {
  std::string s;
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) {
      switch (at(i, j)) {
        case SCEntry::Less: s += '<'; break;
        case SCEntry::Leq: s += '='; break;
        case SCEntry::Unknown: s += '?'; break;
      }
      if (j + 1 < cols_) s += ' ';
    }
    s += '\n';
  }
  return s;
}

SCMatrix compose(const SCMatrix& m1, const SCMatrix& m2) {
  if (m1.cols() != m2.rows())
    throw std::logic_error("size-change matrix dimension mismatch");
  SCMatrix out(m1.rows(), m2.cols());
  for (int i = 0; i < m1.rows(); ++i)
    for (int k = 0; k < m2.cols(); ++k) {
      SCEntry best = SCEntry::Unknown;
      for (int j = 0; j < m1.cols(); ++j)
        best = sc_best(best, sc_combine(m1.at(i, j), m2.at(j, k)));
      out.set(i, k, best);
    }
  return out;
}

SCMatrix edge_matrix(const PosCtx& g, const std::vector<OrdPtr>& args_src,
                     const std::vector<OrdPtr>& args_dst) {
  SCMatrix m(static_cast<int>(args_src.size()),
             static_cast<int>(args_dst.size()));
  for (size_t i = 0; i < args_src.size(); ++i)
    for (size_t j = 0; j < args_dst.size(); ++j) {
      if (ord_less(g, args_dst[j], args_src[i]))
        m.set(static_cast<int>(i), static_cast<int>(j), SCEntry::Less);
      else if (ord_leq(g, args_dst[j], args_src[i]))
        m.set(static_cast<int>(i), static_cast<int>(j), SCEntry::Leq);
    }
  return m;
}

WfVerdict check_well_founded(const CallGraph& g) {
  // Worklist saturation over edge compositions until no new triple appears.
  std::vector<CallGraph::Edge> closure = g.edges;
  auto known = [&](const CallGraph::Edge& e) {
    for (auto& k : closure)
      if (k == e) return true;
    return false;
  };
  for (size_t w = 0; w < closure.size(); ++w) {
    CallGraph::Edge e1 = closure[w];
    size_t n = closure.size();
    for (size_t i = 0; i < n; ++i) {
      const CallGraph::Edge& e2 = closure[i];
      if (e1.dst == e2.src) {
        CallGraph::Edge c{e1.src, e2.dst, compose(e1.mat, e2.mat)};
        if (!known(c)) closure.push_back(std::move(c));
      }
      if (e2.dst == e1.src) {
        CallGraph::Edge c{e2.src, e1.dst, compose(e2.mat, e1.mat)};
        if (!known(c)) closure.push_back(std::move(c));
      }
    }
  }
  for (auto& e : closure) {
    if (e.src != e.dst) continue;
    if (compose(e.mat, e.mat) == e.mat && !e.mat.has_less_diagonal())
      return WfVerdict{false, e.src, e.mat};
  }
  return WfVerdict{};
}

}  // namespace szm
