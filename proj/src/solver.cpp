#include "ahcat/connections.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <cmath>
#include <random>

namespace ahcat {

namespace {

// A block entry as a literal in the cell unknowns: s * z_p or s * conj(z_p).
struct Lit {
  int p = -1;
  double s = 0;
  bool conj = false;
};

struct LitBlock {
  int n = 0, m = 0;
  std::vector<Lit> e;  // row-major
  const Lit& at(int i, int j) const { return e[static_cast<size_t>(i) * m + j]; }
};

struct System {
  std::vector<std::pair<int, std::pair<int, int>>> cells;  // (block, (i, j))
  std::vector<LitBlock> blocks;                             // corner blocks then reflected blocks
  size_t corner_blocks = 0;
  bool square = true;
};

System build_system(const Connection& c) {
  System sys;
  size_t nz = c.bot->R.size();
  std::vector<std::vector<int>> ids(c.W.size());
  for (size_t b = 0; b < c.W.size(); ++b) {
    const Block& bl = c.W[b];
    LitBlock lb;
    lb.n = static_cast<int>(bl.rows.size());
    lb.m = static_cast<int>(bl.cols.size());
    if (lb.n != lb.m) sys.square = false;
    for (int i = 0; i < lb.n; ++i)
      for (int j = 0; j < lb.m; ++j) {
        int p = static_cast<int>(sys.cells.size());
        sys.cells.push_back({static_cast<int>(b), {i, j}});
        lb.e.push_back({p, 1.0, false});
      }
    if (lb.n || lb.m) sys.blocks.push_back(std::move(lb));
  }
  sys.corner_blocks = sys.blocks.size();
  // cell id lookup from (x, z, left edge, right edge)
  auto cell_id = [&](int x, int z, int e, int f) {
    const Block& bl = c.block(x, z);
    int i = bl.rowOff[c.left.edges[e].b] + c.left.pos[e];
    int j = bl.colOff[c.right.edges[f].a] + c.right.pos[f];
    size_t b = static_cast<size_t>(x) * nz + z;
    int base = 0;
    for (size_t k = 0; k < b; ++k) base += static_cast<int>(c.W[k].rows.size() * c.W[k].cols.size());
    return base + i * static_cast<int>(bl.cols.size()) + j;
  };
  for (size_t y = 0; y < c.top->R.size(); ++y)
    for (size_t w = 0; w < c.bot->L.size(); ++w) {
      std::vector<std::pair<int, int>> r, k;
      reflected_block(c, static_cast<int>(y), static_cast<int>(w), &r, &k);
      if (r.empty() && k.empty()) continue;
      LitBlock lb;
      lb.n = static_cast<int>(r.size());
      lb.m = static_cast<int>(k.size());
      if (lb.n != lb.m) sys.square = false;
      for (auto& [x, e] : r)
        for (auto& [z, f] : k) {
          double s = std::sqrt(c.top->muL[x] * c.bot->muR[z] / (c.top->muR[y] * c.bot->muL[w]));
          lb.e.push_back({cell_id(x, z, e, f), s, true});
        }
      sys.blocks.push_back(std::move(lb));
    }
  return sys;
}

inline cplx val(const Lit& l, const Eigen::VectorXcd& z) { return l.s * (l.conj ? std::conj(z[l.p]) : z[l.p]); }
inline Lit bar(Lit l) {
  l.conj = !l.conj;
  return l;
}

// Accumulates the Wirtinger derivatives of a product of literals into (dz, dzbar) keyed by unknown.
struct Grad {
  std::vector<std::pair<int, cplx>> dz, dzb;
};

void product_grad(const Lit* lits, int k, const Eigen::VectorXcd& z, cplx coeff, Grad& g) {
  for (int a = 0; a < k; ++a) {
    cplx rest = coeff * lits[a].s;
    for (int b = 0; b < k; ++b)
      if (b != a) rest *= val(lits[b], z);
    if (lits[a].conj) g.dzb.push_back({lits[a].p, rest});
    else g.dz.push_back({lits[a].p, rest});
  }
}

// Real residual rows: unitarity of each block and realness of 2x2 minor products in blocks of size >= 3.
void residuals(const System& sys, const Eigen::VectorXcd& z, Eigen::VectorXd& F, Eigen::MatrixXd* J) {
  std::vector<double> f;
  std::vector<Grad> grads;
  auto push = [&](double v, Grad&& g) {
    f.push_back(v);
    if (J) grads.push_back(std::move(g));
  };
  for (const auto& b : sys.blocks) {
    for (int i = 0; i < b.n; ++i)
      for (int j = i; j < b.n; ++j) {
        cplx E = i == j ? -1.0 : 0.0;
        Grad g;
        for (int k = 0; k < b.m; ++k) {
          Lit pr[2] = {b.at(i, k), bar(b.at(j, k))};
          E += val(pr[0], z) * val(pr[1], z);
          if (J) product_grad(pr, 2, z, 1.0, g);
        }
        if (i == j) {
          push(E.real(), std::move(g));
        } else {
          Grad gi = g;
          for (auto& t : gi.dz) t.second *= cplx(0, -1);
          for (auto& t : gi.dzb) t.second *= cplx(0, -1);
          // Re E and Im E = Re(-i E)
          push(E.real(), std::move(g));
          push(E.imag(), std::move(gi));
        }
      }
    if (b.n < 3 || b.m < 3) continue;
    for (int i = 0; i < b.n; ++i)
      for (int j = i + 1; j < b.n; ++j)
        for (int k = 0; k < b.m; ++k)
          for (int l = k + 1; l < b.m; ++l) {
            Lit pr[4] = {b.at(i, k), b.at(j, l), bar(b.at(i, l)), bar(b.at(j, k))};
            cplx Q = val(pr[0], z) * val(pr[1], z) * val(pr[2], z) * val(pr[3], z);
            Grad g;
            if (J) product_grad(pr, 4, z, cplx(0, -1), g);
            push(Q.imag(), std::move(g));
          }
  }
  F = Eigen::Map<Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
  if (!J) return;
  size_t n = static_cast<size_t>(z.size());
  J->setZero(static_cast<Eigen::Index>(f.size()), static_cast<Eigen::Index>(2 * n));
  // row value is Re(G) for a holomorphic-antiholomorphic expression G; dRe/dx = Re(dG/dz + dG/dzb),
  // dRe/dy = Re(i (dG/dz - dG/dzb))
  for (size_t r = 0; r < grads.size(); ++r) {
    for (auto& [p, d] : grads[r].dz) {
      (*J)(r, p) += d.real();
      (*J)(r, n + p) += (cplx(0, 1) * d).real();
    }
    for (auto& [p, d] : grads[r].dzb) {
      (*J)(r, p) += d.real();
      (*J)(r, n + p) -= (cplx(0, 1) * d).real();
    }
  }
}

MatrixC polar(const MatrixC& A) {
  Eigen::JacobiSVD<MatrixC> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

MatrixC gather(const LitBlock& b, const Eigen::VectorXcd& z) {
  MatrixC M(b.n, b.m);
  for (int i = 0; i < b.n; ++i)
    for (int j = 0; j < b.m; ++j) M(i, j) = val(b.at(i, j), z);
  return M;
}

void scatter(const LitBlock& b, const MatrixC& M, Eigen::VectorXcd& z) {
  for (int i = 0; i < b.n; ++i)
    for (int j = 0; j < b.m; ++j) {
      const Lit& l = b.at(i, j);
      cplx v = M(i, j) / l.s;
      z[l.p] = l.conj ? std::conj(v) : v;
    }
}

void polar_sweeps(const System& sys, Eigen::VectorXcd& z, int sweeps) {
  for (int s = 0; s < sweeps; ++s) {
    for (size_t b = 0; b < sys.corner_blocks; ++b) scatter(sys.blocks[b], polar(gather(sys.blocks[b], z)), z);
    for (size_t b = sys.corner_blocks; b < sys.blocks.size(); ++b) {
      // averaging towards the unitary of the reflected block keeps both families in play
      MatrixC M = gather(sys.blocks[b], z);
      scatter(sys.blocks[b], 0.5 * (M + polar(M)), z);
    }
  }
}

double levenberg_marquardt(const System& sys, Eigen::VectorXcd& z, int iters, double tol) {
  size_t n = static_cast<size_t>(z.size());
  auto pack = [&](const Eigen::VectorXcd& v) {
    Eigen::VectorXd x(2 * n);
    x.head(n) = v.real();
    x.tail(n) = v.imag();
    return x;
  };
  auto unpack = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXcd v(n);
    for (size_t i = 0; i < n; ++i) v[i] = cplx(x[i], x[n + i]);
    return v;
  };
  Eigen::VectorXd x = pack(z), F, Fn;
  Eigen::MatrixXd J;
  residuals(sys, z, F, &J);
  double cost = F.squaredNorm(), lambda = 1e-3;
  for (int it = 0; it < iters && F.cwiseAbs().maxCoeff() > tol; ++it) {
    Eigen::MatrixXd A = J.transpose() * J;
    Eigen::VectorXd g = J.transpose() * F;
    bool accepted = false;
    for (int tries = 0; tries < 20 && !accepted; ++tries) {
      Eigen::MatrixXd Ad = A;
      Ad.diagonal().array() += lambda * (1.0 + A.diagonal().array());
      Eigen::VectorXd step = Ad.ldlt().solve(-g);
      Eigen::VectorXd xn = x + step;
      Eigen::VectorXcd zn = unpack(xn);
      residuals(sys, zn, Fn, nullptr);
      double cn = Fn.squaredNorm();
      if (std::isfinite(cn) && cn < cost) {
        x = xn;
        z = zn;
        cost = cn;
        lambda = std::max(lambda / 3, 1e-15);
        accepted = true;
      } else {
        lambda *= 4;
      }
    }
    if (!accepted) break;
    residuals(sys, z, F, &J);
  }
  return F.size() ? F.cwiseAbs().maxCoeff() : 0.0;
}

void store(const System& sys, const Eigen::VectorXcd& z, Connection& c) {
  for (size_t p = 0; p < sys.cells.size(); ++p) {
    auto& [b, ij] = sys.cells[p];
    c.W[b].M(ij.first, ij.second) = z[p];
  }
}

}  // namespace

double solver_residual(const Connection& c) {
  System sys = build_system(c);
  if (!sys.square) return INFINITY;
  Eigen::VectorXcd z(sys.cells.size());
  for (size_t p = 0; p < sys.cells.size(); ++p) {
    auto& [b, ij] = sys.cells[p];
    z[p] = c.W[b].M(ij.first, ij.second);
  }
  Eigen::VectorXd F;
  residuals(sys, z, F, nullptr);
  return F.size() ? F.cwiseAbs().maxCoeff() : 0.0;
}

Connection solve_connection(const FourGraphSquare& sq, unsigned seed, const TolerancePolicy& pol, const SolverOptions& opt,
                            SolveInfo* info) {
  Connection c = connection_on_square(sq, pol);
  System sys = build_system(c);
  if (!sys.square)
    throw SolverFailure("square has a non-square corner block: no biunitary connection exists", INFINITY);
  double best = INFINITY;
  Eigen::VectorXcd bestz;
  int attempt = 0;
  for (; attempt < opt.restarts; ++attempt) {
    std::mt19937_64 rng(static_cast<uint64_t>(seed) * 1000003ULL + static_cast<uint64_t>(attempt));
    std::normal_distribution<double> nd;
    Eigen::VectorXcd z(sys.cells.size());
    for (auto& v : z) v = cplx(nd(rng), nd(rng));
    polar_sweeps(sys, z, opt.polar_sweeps);
    double r = levenberg_marquardt(sys, z, opt.lm_iterations, pol.solver_tol);
    if (r < best) {
      best = r;
      bestz = z;
    }
    if (r <= pol.solver_tol) break;
  }
  if (info) {
    info->attempts = std::min(attempt + 1, opt.restarts);
    info->residual = best;
  }
  if (!(best <= pol.solver_tol))
    throw SolverFailure("solver did not converge after " + std::to_string(opt.restarts) + " restarts", best);
  store(sys, bestz, c);
  return canonical_gauge(c);
}

}  // namespace ahcat
