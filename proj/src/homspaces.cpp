#include "ahcat/homspaces.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <random>

namespace ahcat {

namespace {

MatrixC dense(const std::vector<MatrixC>& blocks, const VSpace& src, const VSpace& dst) {
  MatrixC M = MatrixC::Zero(dst.size(), src.size());
  for (size_t p = 0; p < blocks.size(); ++p) {
    const auto& rs = dst.pair[p];
    const auto& cs = src.pair[p];
    for (size_t i = 0; i < rs.size(); ++i)
      for (size_t j = 0; j < cs.size(); ++j) M(rs[i], cs[j]) = blocks[p](i, j);
  }
  return M;
}

void require_same_rows(const Connection& X, const Connection& Y) {
  if (!same_row(X.top, Y.top) || !same_row(X.bot, Y.bot))
    throw StructuralError("hom: " + X.name + " and " + Y.name + " have different horizontal graphs");
}

// A block whose entries are linear in the k unknowns: column t holds the block for unit vector t.
struct LinBlock {
  int r = 0, c = 0;
  MatrixC A;  // (r*c) x k, column-major vec of the block
  bool set = false;
  MatrixC slice(int t) const { return Eigen::Map<const MatrixC>(A.col(t).data(), r, c); }
};

}  // namespace

MatrixC EdgeMap::dense_left(const VSpace& src, const VSpace& dst) const { return dense(left, src, dst); }
MatrixC EdgeMap::dense_right(const VSpace& src, const VSpace& dst) const { return dense(right, src, dst); }

EdgeMap EdgeMap::adjoint() const {
  EdgeMap a;
  for (auto& b : left) a.left.push_back(b.adjoint());
  for (auto& b : right) a.right.push_back(b.adjoint());
  return a;
}

double EdgeMap::norm2() const {
  double s = 0;
  for (auto& b : left) s += b.squaredNorm();
  return s;
}

cplx inner(const EdgeMap& a, const EdgeMap& b) {
  cplx s = 0;
  for (size_t p = 0; p < a.left.size(); ++p)
    if (a.left[p].size()) s += (a.left[p].adjoint() * b.left[p]).trace();
  return s;
}

EdgeMap operator*(const EdgeMap& a, const EdgeMap& b) {
  EdgeMap r;
  for (size_t p = 0; p < a.left.size(); ++p) r.left.push_back(a.left[p] * b.left[p]);
  for (size_t p = 0; p < a.right.size(); ++p) r.right.push_back(a.right[p] * b.right[p]);
  return r;
}

EdgeMap operator+(const EdgeMap& a, const EdgeMap& b) {
  EdgeMap r;
  for (size_t p = 0; p < a.left.size(); ++p) r.left.push_back(a.left[p] + b.left[p]);
  for (size_t p = 0; p < a.right.size(); ++p) r.right.push_back(a.right[p] + b.right[p]);
  return r;
}

EdgeMap operator*(cplx s, const EdgeMap& a) {
  EdgeMap r;
  for (auto& b : a.left) r.left.push_back(s * b);
  for (auto& b : a.right) r.right.push_back(s * b);
  return r;
}

EdgeMap identity_map(const Connection& c) {
  EdgeMap m;
  for (auto& p : c.left.pair) m.left.push_back(MatrixC::Identity(p.size(), p.size()));
  for (auto& p : c.right.pair) m.right.push_back(MatrixC::Identity(p.size(), p.size()));
  return m;
}

namespace {

// Places the blocks of a pair-indexed map along the corner basis of (x, z).
MatrixC corner_left(const Block& BY, const Block& BX, const Connection& X, const Connection& Y, int x,
                    const std::vector<MatrixC>& TL) {
  MatrixC P = MatrixC::Zero(BY.rows.size(), BX.rows.size());
  int nB = X.left.nB;
  for (int w = 0; w < nB; ++w) {
    if (BY.rowOff[w] < 0 || BX.rowOff[w] < 0) continue;
    const MatrixC& T = TL[static_cast<size_t>(x) * nB + w];
    if (T.size()) P.block(BY.rowOff[w], BX.rowOff[w], T.rows(), T.cols()) = T;
  }
  (void)Y;
  return P;
}

MatrixC corner_right(const Block& BY, const Block& BX, const Connection& X, int z, const std::vector<MatrixC>& TR) {
  MatrixC R = MatrixC::Zero(BY.cols.size(), BX.cols.size());
  int nB = X.right.nB;
  for (size_t y = 0; y < BX.colOff.size(); ++y) {
    if (BY.colOff[y] < 0 || BX.colOff[y] < 0) continue;
    const MatrixC& T = TR[y * nB + z];
    if (T.size()) R.block(BY.colOff[y], BX.colOff[y], T.rows(), T.cols()) = T;
  }
  return R;
}

double commutation_defect(const Connection& X, const Connection& Y, const std::vector<MatrixC>& TL,
                          const std::vector<MatrixC>& TR) {
  double worst = 0;
  for (size_t x = 0; x < X.top->L.size(); ++x)
    for (size_t z = 0; z < X.bot->R.size(); ++z) {
      const Block& BX = X.block(static_cast<int>(x), static_cast<int>(z));
      const Block& BY = Y.block(static_cast<int>(x), static_cast<int>(z));
      if (BY.rows.empty() || BX.cols.empty()) continue;
      MatrixC P = corner_left(BY, BX, X, Y, static_cast<int>(x), TL);
      MatrixC R = corner_right(BY, BX, X, static_cast<int>(z), TR);
      MatrixC E = BY.M * R - P * BX.M;
      if (E.size()) worst = std::max(worst, E.cwiseAbs().maxCoeff());
    }
  return worst;
}

}  // namespace

double intertwiner_residual(const Connection& X, const Connection& Y, const EdgeMap& T) {
  require_same_rows(X, Y);
  return commutation_defect(X, Y, T.left, T.right);
}

std::vector<EdgeMap> hom_space(const Connection& X, const Connection& Y) {
  require_same_rows(X, Y);
  const int nTL = static_cast<int>(X.top->L.size()), nTR = static_cast<int>(X.top->R.size());
  const int nBL = static_cast<int>(X.bot->L.size()), nBR = static_cast<int>(X.bot->R.size());
  std::vector<LinBlock> L(static_cast<size_t>(nTL) * nBL), R(static_cast<size_t>(nTR) * nBR);
  for (size_t p = 0; p < L.size(); ++p) {
    L[p].r = static_cast<int>(Y.left.pair[p].size());
    L[p].c = static_cast<int>(X.left.pair[p].size());
  }
  for (size_t p = 0; p < R.size(); ++p) {
    R[p].r = static_cast<int>(Y.right.pair[p].size());
    R[p].c = static_cast<int>(X.right.pair[p].size());
  }
  int k = 0;
  for (int w = 0; w < nBL; ++w) k += L[w].r * L[w].c;
  if (k == 0) return {};
  for (auto& b : L) b.A = MatrixC::Zero(b.r * b.c, k);
  for (auto& b : R) b.A = MatrixC::Zero(b.r * b.c, k);
  {
    int o = 0;
    for (int w = 0; w < nBL; ++w) {
      for (int t = 0; t < L[w].r * L[w].c; ++t) L[w].A(t, o++) = 1;
      L[w].set = true;
    }
  }
  std::vector<char> knownL(nTL, 0), knownR(nTR, 0);
  knownL[0] = 1;
  std::vector<int> qL{0}, qR;
  auto slices_left = [&](int x, int t) {
    std::vector<MatrixC> TL(L.size());
    for (int w = 0; w < nBL; ++w) {
      auto& b = L[static_cast<size_t>(x) * nBL + w];
      TL[static_cast<size_t>(x) * nBL + w] = b.slice(t);
    }
    return TL;
  };
  while (!qL.empty() || !qR.empty()) {
    while (!qL.empty()) {
      int x = qL.back();
      qL.pop_back();
      for (int z = 0; z < nBR; ++z) {
        const Block& BX = X.block(x, z);
        const Block& BY = Y.block(x, z);
        if (BX.cols.empty() && BY.cols.empty()) continue;
        for (int y : X.top->nbrR[x]) {
          auto& tr = R[static_cast<size_t>(y) * nBR + z];
          if (tr.set || tr.r * tr.c == 0) continue;
          for (int t = 0; t < k; ++t) {
            auto TL = slices_left(x, t);
            MatrixC P = corner_left(BY, BX, X, Y, x, TL);
            MatrixC Q = BY.M.adjoint() * P * BX.M;
            MatrixC blk = Q.block(BY.colOff[y], BX.colOff[y], tr.r, tr.c);
            tr.A.col(t) = Eigen::Map<Eigen::VectorXcd>(blk.data(), blk.size());
          }
          tr.set = true;
        }
      }
      for (int y : X.top->nbrR[x])
        if (!knownR[y]) {
          knownR[y] = 1;
          qR.push_back(y);
        }
    }
    while (!qR.empty()) {
      int y = qR.back();
      qR.pop_back();
      for (int w = 0; w < nBL; ++w) {
        std::vector<std::pair<int, int>> rX, cX, rY, cY;
        MatrixC UX = reflected_block(X, y, w, &rX, &cX);
        MatrixC UY = reflected_block(Y, y, w, &rY, &cY);
        if (rX.empty() && rY.empty()) continue;
        for (int x : X.top->nbrL[y]) {
          auto& tl = L[static_cast<size_t>(x) * nBL + w];
          if (tl.set || tl.r * tl.c == 0) continue;
          for (int t = 0; t < k; ++t) {
            MatrixC P = MatrixC::Zero(cY.size(), cX.size());
            for (size_t a = 0; a < cY.size(); ++a)
              for (size_t b = 0; b < cX.size(); ++b) {
                if (cY[a].first != cX[b].first) continue;
                int z = cY[a].first;
                auto& tr = R[static_cast<size_t>(y) * nBR + z];
                if (!tr.set) continue;
                int i = Y.right.pos[cY[a].second], j = X.right.pos[cX[b].second];
                P(a, b) = tr.A(i + static_cast<Eigen::Index>(j) * tr.r, t);
              }
            MatrixC Q = UY.conjugate() * P * UX.transpose();
            for (size_t a = 0; a < rY.size(); ++a)
              for (size_t b = 0; b < rX.size(); ++b) {
                if (rY[a].first != x || rX[b].first != x) continue;
                int i = Y.left.pos[rY[a].second], j = X.left.pos[rX[b].second];
                tl.A(i + static_cast<Eigen::Index>(j) * tl.r, t) = Q(a, b);
              }
          }
          tl.set = true;
        }
      }
      for (int x : X.top->nbrL[y])
        if (!knownL[x]) {
          knownL[x] = 1;
          qL.push_back(x);
        }
    }
  }
  // remaining commutation equations
  std::vector<MatrixC> rowsC;
  Eigen::Index m = 0;
  for (int x = 0; x < nTL; ++x)
    for (int z = 0; z < nBR; ++z) {
      const Block& BX = X.block(x, z);
      const Block& BY = Y.block(x, z);
      if (BY.rows.empty() || BX.cols.empty()) continue;
      MatrixC C(BY.rows.size() * BX.cols.size(), k);
      for (int t = 0; t < k; ++t) {
        std::vector<MatrixC> TL(L.size()), TR(R.size());
        for (size_t p = 0; p < L.size(); ++p) TL[p] = L[p].slice(t);
        for (size_t p = 0; p < R.size(); ++p) TR[p] = R[p].slice(t);
        MatrixC P = corner_left(BY, BX, X, Y, x, TL);
        MatrixC Rr = corner_right(BY, BX, X, z, TR);
        MatrixC E = BY.M * Rr - P * BX.M;
        C.col(t) = Eigen::Map<Eigen::VectorXcd>(E.data(), E.size());
      }
      m += C.rows();
      rowsC.push_back(std::move(C));
    }
  MatrixC ns;
  if (m == 0) {
    ns = MatrixC::Identity(k, k);
  } else {
    MatrixC C(m, k);
    Eigen::Index o = 0;
    for (auto& c : rowsC) {
      C.middleRows(o, c.rows()) = c;
      o += c.rows();
    }
    MatrixC Rm;
    if (m > k) {
      Eigen::HouseholderQR<MatrixC> qr(C);
      Rm = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    } else {
      Rm = C;
    }
    Eigen::JacobiSVD<MatrixC> svd(Rm, Eigen::ComputeFullV);
    auto s = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s[i] > 1e-8) ++rank;
    ns = svd.matrixV().rightCols(k - rank);
  }
  std::vector<EdgeMap> out;
  for (Eigen::Index col = 0; col < ns.cols(); ++col) {
    EdgeMap e;
    for (auto& b : L) {
      Eigen::VectorXcd v = b.r > 0 && b.c > 0 ? Eigen::VectorXcd(b.A * ns.col(col)) : Eigen::VectorXcd();
      e.left.push_back(Eigen::Map<MatrixC>(v.data(), b.r, b.c));
    }
    for (auto& b : R) {
      Eigen::VectorXcd v = b.r > 0 && b.c > 0 ? Eigen::VectorXcd(b.A * ns.col(col)) : Eigen::VectorXcd();
      e.right.push_back(Eigen::Map<MatrixC>(v.data(), b.r, b.c));
    }
    for (auto& q : out) e = e + (-inner(q, e)) * q;
    double n = std::sqrt(e.norm2());
    if (n < 1e-10) continue;
    out.push_back((1.0 / n) * e);
  }
  return out;
}

size_t hom_dim(const Connection& X, const Connection& Y) { return hom_space(X, Y).size(); }

Connection sub_connection(const Connection& c, const EdgeMap& proj, const std::string& name, EdgeMap* embedding) {
  auto ranges = [](const std::vector<MatrixC>& blocks) {
    std::vector<MatrixC> out;
    for (auto& b : blocks) {
      if (b.size() == 0) {
        out.push_back(MatrixC::Zero(b.rows(), 0));
        continue;
      }
      MatrixC H = 0.5 * (b + b.adjoint());
      Eigen::SelfAdjointEigenSolver<MatrixC> es(H);
      std::vector<int> keep;
      for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()[i] > 0.5) keep.push_back(static_cast<int>(i));
      MatrixC V(b.rows(), keep.size());
      for (size_t j = 0; j < keep.size(); ++j) V.col(j) = es.eigenvectors().col(keep[j]);
      out.push_back(V);
    }
    return out;
  };
  std::vector<MatrixC> VL = ranges(proj.left), VR = ranges(proj.right);
  Connection s;
  s.name = name;
  s.top = c.top;
  s.bot = c.bot;
  auto make_space = [](const VSpace& old, const std::vector<MatrixC>& V, const std::vector<std::string>& A,
                       const std::vector<std::string>& B) {
    VSpace v;
    v.nA = old.nA;
    v.nB = old.nB;
    for (int a = 0; a < old.nA; ++a)
      for (int b = 0; b < old.nB; ++b) {
        Eigen::Index r = V[static_cast<size_t>(a) * old.nB + b].cols();
        for (Eigen::Index k = 0; k < r; ++k)
          v.edges.push_back({a, b, A[a] + "." + B[b] + (r > 1 ? "#" + std::to_string(k) : std::string())});
      }
    v.finalize();
    return v;
  };
  s.left = make_space(c.left, VL, c.top->L, c.bot->L);
  s.right = make_space(c.right, VR, c.top->R, c.bot->R);
  s.build_blocks();
  size_t nz = c.bot->R.size();
  for (size_t x = 0; x < c.top->L.size(); ++x)
    for (size_t z = 0; z < nz; ++z) {
      const Block& ob = c.W[x * nz + z];
      Block& nb = s.W[x * nz + z];
      if (nb.rows.empty() && nb.cols.empty()) continue;
      MatrixC A = MatrixC::Zero(ob.rows.size(), nb.rows.size());
      for (size_t w = 0; w < ob.rowOff.size(); ++w)
        if (ob.rowOff[w] >= 0 && nb.rowOff[w] >= 0) {
          auto& V = VL[x * c.left.nB + w];
          A.block(ob.rowOff[w], nb.rowOff[w], V.rows(), V.cols()) = V;
        }
      MatrixC B = MatrixC::Zero(ob.cols.size(), nb.cols.size());
      for (size_t y = 0; y < ob.colOff.size(); ++y)
        if (ob.colOff[y] >= 0 && nb.colOff[y] >= 0) {
          auto& V = VR[y * c.right.nB + z];
          B.block(ob.colOff[y], nb.colOff[y], V.rows(), V.cols()) = V;
        }
      nb.M = A.adjoint() * ob.M * B;
    }
  if (embedding) {
    embedding->left = VL;
    embedding->right = VR;
  }
  return s;
}

std::vector<Summand> decompose(const Connection& c, unsigned seed) {
  auto basis = hom_space(c, c);
  if (basis.size() <= 1) return {Summand{c, 1, identity_map(c)}};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  EdgeMap H = 0.0 * basis[0];
  for (auto& b : basis) {
    cplx g(nd(rng), nd(rng));
    H = H + (g * b + std::conj(g) * b.adjoint());
  }
  // spectral clusters of H over the left blocks
  std::vector<double> ev;
  for (auto& b : H.left)
    if (b.size()) {
      Eigen::SelfAdjointEigenSolver<MatrixC> es(b);
      for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) ev.push_back(es.eigenvalues()[i]);
    }
  std::sort(ev.begin(), ev.end());
  double scale = std::max(1.0, std::max(std::abs(ev.front()), std::abs(ev.back())));
  std::vector<double> centers;
  for (double e : ev)
    if (centers.empty() || e - centers.back() > 1e-6 * scale) centers.push_back(e);
  auto projection_for = [&](double center) {
    EdgeMap P;
    auto proj = [&](const std::vector<MatrixC>& blocks, std::vector<MatrixC>& out) {
      for (auto& b : blocks) {
        if (b.size() == 0) {
          out.push_back(b);
          continue;
        }
        Eigen::SelfAdjointEigenSolver<MatrixC> es(b);
        MatrixC Pm = MatrixC::Zero(b.rows(), b.cols());
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
          if (std::abs(es.eigenvalues()[i] - center) <= 1e-6 * scale) Pm += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
        out.push_back(Pm);
      }
    };
    proj(H.left, P.left);
    proj(H.right, P.right);
    return P;
  };
  std::vector<Summand> out;
  for (size_t g = 0; g < centers.size(); ++g) {
    EdgeMap emb;
    Connection s = sub_connection(c, projection_for(centers[g]), c.name + "#" + std::to_string(g), &emb);
    bool found = false;
    for (auto& o : out)
      if (std::abs(pf_dimension(o.conn) - pf_dimension(s)) < 1e-6 && hom_dim(o.conn, s) == 1) {
        ++o.multiplicity;
        found = true;
        break;
      }
    if (!found) out.push_back(Summand{s, 1, emb});
  }
  for (size_t i = 0; i < out.size(); ++i) out[i].conn.name = c.name + "#" + std::to_string(i);
  return out;
}

double quantum_dimension(const Connection& c) {
  if (hom_dim(c, c) != 1) throw std::domain_error("quantum_dimension: " + c.name + " is reducible");
  return pf_dimension(c);
}

double pf_dimension(const Connection& c) {
  double s = 0;
  for (size_t w = 0; w < c.bot->L.size(); ++w) s += c.left.at(0, static_cast<int>(w)).size() * c.bot->muL[w];
  return s / c.top->muL[0];
}

}  // namespace ahcat
