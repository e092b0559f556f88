#include "ahcat/qsystem.hpp"

#include <cmath>
#include <fstream>
#include <future>
#include <sstream>

namespace ahcat {

std::string Section::str() const {
  const char* st = status == Status::Pass ? "PASS" : status == Status::Fail ? "FAIL" : "SKIP";
  std::ostringstream os;
  os << "SECTION " << name << " " << st << " ";
  if (status == Status::Skip)
    os << "-";
  else
    os << format_double(residual);
  os << " anchor=" << anchor;
  if (!detail.empty()) os << " " << detail;
  return os.str();
}

Section& Report::add(std::string name, std::string anchor, bool pass, double residual, std::string detail) {
  Section s;
  s.name = std::move(name);
  s.anchor = std::move(anchor);
  s.status = pass ? Section::Status::Pass : Section::Status::Fail;
  s.residual = residual;
  s.detail = std::move(detail);
  sections.push_back(std::move(s));
  return sections.back();
}

void Report::skip(std::string name, std::string anchor, std::string reason) {
  Section s;
  s.name = std::move(name);
  s.anchor = std::move(anchor);
  s.status = Section::Status::Skip;
  s.detail = std::move(reason);
  sections.push_back(std::move(s));
}

bool Report::pass() const {
  for (auto& s : sections)
    if (s.status == Section::Status::Fail) return false;
  return true;
}

std::string Report::str() const {
  std::ostringstream os;
  for (auto& n : notes) os << "NOTE " << n << "\n";
  for (auto& s : sections) os << s.str() << "\n";
  os << "RESULT " << (pass() ? "PASS" : "FAIL") << "\n";
  return os.str();
}

namespace {

Section make_section(std::string name, std::string anchor, bool pass, double residual, std::string detail = "") {
  Report r;
  r.add(std::move(name), std::move(anchor), pass, residual, std::move(detail));
  return r.sections[0];
}

double num(const std::string& expr) { return parse_expression(expr).to_double(); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

double dev_from_identity(const DenseMap& m, cplx c) { return (m.M - c * MatrixC::Identity(m.M.rows(), m.M.cols())).cwiseAbs().maxCoeff(); }

DenseMap isometric(const VertexRegistry& reg, const std::string& key) {
  auto it = reg.vertices.find(key);
  if (it == reg.vertices.end()) throw RegistryError("registry has no vertex " + key);
  return cplx(1.0 / it->second.normalization.to_double()) * it->second.map;
}

std::string diagram_path(const std::string& rel) { return data_dir() + "/diagrams/" + rel; }

Diagram load(const std::string& token, const VertexRegistry& reg) {
  if (token.rfind("v:", 0) == 0) return parse_diagram(token, reg);
  return read_diagram(diagram_path(token), reg);
}

// Least-squares scalar c with a ~ c b, and the residual max |a - c b|.
double fit_scalar(const MatrixC& a, const MatrixC& b, cplx& c) {
  double bb = b.squaredNorm();
  c = bb > 0 ? b.cwiseProduct(a.conjugate()).sum() : cplx(0);
  c = bb > 0 ? std::conj(c) / bb : cplx(0);
  return a.size() ? (a - c * b).cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace

Section check_conjugacy(const VertexRegistry& reg, double d, const TolerancePolicy& pol) {
  const std::string anchor = "conjugacy-equations";
  VertexRegistry iso = reg;
  for (auto key : {"r_kappa", "rbar_kappa"}) {
    auto& v = iso.vertices.at(key);
    v.map = isometric(reg, key);
    v.normalization = Scalar(1);
  }
  double worst = 0;
  cplx seen{0};
  for (auto f : {"lemmas/zigzag_k.dgm", "lemmas/zigzag_kb.dgm"}) {
    DenseMap m = evaluate(read_diagram(diagram_path(f), iso), iso);
    worst = std::max(worst, dev_from_identity(m, 1.0 / d));
    seen = m.M.trace() / double(m.M.rows());
  }
  std::string detail = "d=" + fmt(d) + " zigzag=" + fmt(seen.real()) + "*Id (1/zigzag=" + fmt(1.0 / seen.real()) + ")";
  return make_section("conjugacy", anchor, worst <= pol.eq_tol, worst, detail);
}

SkeinFit fit_skein(const VertexRegistry& reg, bool kappa_side) {
  std::string side = kappa_side ? "k" : "kb";
  DenseMap lhs = evaluate(read_diagram(diagram_path("lemmas/skein_" + side + ".dgm"), reg), reg);
  DenseMap cup = evaluate(read_diagram(diagram_path("lemmas/skein_" + side + "_cup.dgm"), reg), reg);
  DenseMap tri = evaluate(read_diagram(diagram_path("lemmas/skein_" + side + "_tri.dgm"), reg), reg);
  Eigen::Index n = lhs.M.size();
  MatrixC A(n, 2);
  A.col(0) = Eigen::Map<const Eigen::VectorXcd>(cup.M.data(), n);
  A.col(1) = Eigen::Map<const Eigen::VectorXcd>(tri.M.data(), n);
  Eigen::VectorXcd b = Eigen::Map<const Eigen::VectorXcd>(lhs.M.data(), n);
  Eigen::VectorXcd c = A.colPivHouseholderQr().solve(b);
  SkeinFit f;
  f.c_cup = c(0).real();
  f.c_tri = c(1).real();
  f.residual = (A * c - b).cwiseAbs().maxCoeff();
  f.residual = std::max(f.residual, std::max(std::abs(c(0).imag()), std::abs(c(1).imag())));
  return f;
}

Section check_skein(const VertexRegistry& reg, double c_cup, double c_tri, const TolerancePolicy& pol) {
  double worst = 0;
  for (std::string side : {"kb", "k"}) {
    DenseMap lhs = evaluate(read_diagram(diagram_path("lemmas/skein_" + side + ".dgm"), reg), reg);
    DenseMap cup = evaluate(read_diagram(diagram_path("lemmas/skein_" + side + "_cup.dgm"), reg), reg);
    DenseMap tri = evaluate(read_diagram(diagram_path("lemmas/skein_" + side + "_tri.dgm"), reg), reg);
    worst = std::max(worst, max_diff(lhs, cplx(c_cup) * cup + cplx(c_tri) * tri));
  }
  return make_section("skein", "skein-relation", worst <= pol.eq_tol, worst,
                      "coefficients=(" + fmt(c_cup) + ", " + fmt(c_tri) + ")");
}

namespace {

Section run_entry(const std::vector<std::string>& t, const VertexRegistry& reg, const TolerancePolicy& pol) {
  const std::string& kind = t[0];
  const std::string &name = t[1], &anchor = t[2];
  try {
    if (kind == "COEF") {
      if (t.size() < 7) throw StructuralError("COEF needs 6 fields");
      Diagram d = load(t[3], reg);
      bool unique = t.size() > 7 && t[7] == "unique";
      CoefficientResult c = coefficient(d, reg, t[4], t[5], unique);
      cplx direct = evaluate(d, reg).at(t[4], t[5]);
      double agree = std::abs(c.value - direct);
      std::string detail = "value=" + fmt(c.value.real()) + " states=" + std::to_string(c.states);
      if (std::abs(c.value.imag()) > pol.eq_tol) detail += " imag=" + fmt(c.value.imag());
      if (t[6] == "positive") {
        bool ok = c.value.real() > pol.eq_tol && std::abs(c.value.imag()) <= pol.eq_tol && agree <= pol.eq_tol;
        return make_section(name, anchor, ok, agree, detail + " expected>0");
      }
      double want = num(t[6]);
      double res = std::max(std::abs(c.value - want), agree);
      return make_section(name, anchor, res <= pol.eq_tol, res, detail + " expected=" + fmt(want));
    }
    if (kind == "SCALAR") {
      if (t.size() < 5) throw StructuralError("SCALAR needs 4 fields");
      DenseMap m = evaluate(load(t[3], reg), reg);
      double want = num(t[4]);
      double res = dev_from_identity(m, want);
      return make_section(name, anchor, res <= pol.eq_tol, res, "expected=" + fmt(want) + "*Id");
    }
    if (kind == "EQUAL") {
      if (t.size() < 5) throw StructuralError("EQUAL needs 4 fields");
      DenseMap a = evaluate(load(t[3], reg), reg), b = evaluate(load(t[4], reg), reg);
      double res = max_diff(a, b);
      return make_section(name, anchor, res <= pol.eq_tol, res, "scale=" + fmt(a.max_abs()));
    }
    throw StructuralError("unknown suite entry " + kind);
  } catch (const StructuralError&) {
    throw;
  } catch (const std::exception& e) {
    return make_section(name, anchor, false, INFINITY, std::string("error: ") + e.what());
  }
}

}  // namespace

std::vector<Section> run_lemma_suite(const VertexRegistry& reg, const TolerancePolicy& pol, const std::string& path) {
  std::string file = path.empty() ? data_dir() + "/lemmas.suite" : path;
  std::istringstream in(slurp(file));
  std::vector<std::vector<std::string>> entries;
  std::string line;
  while (std::getline(in, line)) {
    auto h = line.find('#');
    if (h != std::string::npos) line.resize(h);
    std::istringstream ls(line);
    std::vector<std::string> t;
    for (std::string w; ls >> w;) t.push_back(w);
    if (t.empty()) continue;
    if (t.size() < 4) throw StructuralError(file + ": short entry '" + line + "'");
    entries.push_back(std::move(t));
  }
  std::vector<std::future<Section>> jobs;
  for (auto& t : entries) jobs.push_back(std::async(std::launch::async, run_entry, std::cref(t), std::cref(reg), std::cref(pol)));
  std::vector<Section> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

Section check_identity_split(const VertexRegistry& reg, const TolerancePolicy& pol) {
  double beta = num("beta"), beta1 = num("beta1");
  DenseMap cup = reg.get("r_kappa");  // sqrt(beta) times an isometry
  DenseMap v = reg.get("v");          // sqrt(beta/beta1) times an isometry
  DenseMap id = reg.id({"k", "kb"});
  DenseMap rhs = cplx(1 / beta) * (cup * cup.adjoint()) + cplx(beta1 / beta) * (v * v.adjoint());
  double res = max_diff(id, rhs);
  return make_section("identity-split", "kappa-kappabar-identity", res <= pol.eq_tol, res,
                      "coefficients=(1/beta, beta1/beta)");
}

QSystemCandidate build_R_S(const VertexRegistry& reg) {
  for (auto key : {"kbr", "rkk", "ara", "v"})
    if (!reg.has(key)) throw RegistryError("registry is missing " + std::string(key) + " (AH data needed)");
  QSystemCandidate qc;
  const auto& S = *reg.strands;
  qc.sigma = compose({&S.get("kb").conn, &S.get("a").conn, &S.get("k").conn});
  qc.R_diagram = read_diagram(diagram_path("qsystem/R.dgm"), reg);
  qc.S_diagram = read_diagram(diagram_path("qsystem/S.dgm"), reg);
  qc.R = evaluate(qc.R_diagram, reg);
  qc.S = evaluate(qc.S_diagram, reg);
  qc.d = num("beta*beta");
  return qc;
}

namespace {

const std::vector<std::string> kSigma = {"kb", "a", "k"};

// Moves the whole source boundary of a rotated map diagram to the bottom, three strands at a time.
Diagram bent(const Diagram& d, const VertexRegistry& reg) {
  Diagram r = rotate(d, reg);
  for (int i = 0; i < 3; ++i) r = bend(r, Side::Left, reg);
  return r;
}

}  // namespace

ReducedReport check_reduced(const QSystemCandidate& qc, const VertexRegistry& reg, const TolerancePolicy& pol) {
  ReducedReport out;
  auto add = [&](std::string name, std::string anchor, double res, std::string detail = "") {
    out.sections.push_back(make_section(std::move(name), std::move(anchor), res <= pol.eq_tol, res, std::move(detail)));
  };
  add("R-isometry", "R-S-isometries", dev_from_identity(qc.R.adjoint() * qc.R, 1.0));
  add("S-isometry", "R-S-isometries", dev_from_identity(qc.S.adjoint() * qc.S, 1.0));

  DenseMap idS = reg.id(kSigma);
  DenseMap SxI = reg.T({qc.S, idS}), IxS = reg.T({idS, qc.S});
  add("condition-1", "frobenius-condition", max_diff(SxI * qc.R, IxS * qc.R));

  Diagram left = then(qc.R_diagram, pad(qc.S_diagram, {}, kSigma, reg), reg);
  Diagram right = then(qc.R_diagram, pad(qc.S_diagram, kSigma, {}, reg), reg);
  DenseMap bl = evaluate(bent(left, reg), reg), br = evaluate(bent(right, reg), reg);
  add("condition-1-bent", "frobenius-condition", max_diff(bl, br),
      "bent shape [" + bl.src->key() + "]->[" + bl.dst->key() + "]");

  DenseMap lhs = reg.T({qc.R, idS}) - reg.T({idS, qc.R});
  DenseMap rhs = IxS * qc.S - SxI * qc.S;
  cplx lam;
  double res = fit_scalar(rhs.M, lhs.M, lam);
  out.lambda = lam.real();
  out.lambda_residual = std::max(res, std::abs(lam.imag()));
  double want_lemma = num("beta/(beta1*beta1)");
  double want_prop = std::sqrt(qc.d + 1) / qc.d;
  std::ostringstream det;
  det << "lambda=" << fmt(out.lambda) << " beta/beta1^2=" << fmt(want_lemma) << " (diff " << fmt(std::abs(out.lambda - want_lemma))
      << ") sqrt(d+1)/d=" << fmt(want_prop) << " (diff " << fmt(std::abs(out.lambda - want_prop)) << ") matches=";
  if (std::abs(out.lambda - want_lemma) <= pol.eq_tol)
    det << "beta/beta1^2";
  else if (std::abs(out.lambda - want_prop) <= pol.eq_tol)
    det << "sqrt(d+1)/d";
  else
    det << "neither";
  add("condition-2-fit", "associativity-scalar", out.lambda_residual, det.str());
  return out;
}

GradedMap GradedMap::adjoint() const {
  GradedMap g;
  g.src = dst;
  g.dst = src;
  g.blocks.assign(src.size(), std::vector<std::optional<DenseMap>>(dst.size()));
  for (size_t i = 0; i < dst.size(); ++i)
    for (size_t j = 0; j < src.size(); ++j)
      if (blocks[i][j]) g.blocks[j][i] = blocks[i][j]->adjoint();
  return g;
}

GradedMap graded_identity(const StrandSet& S, const std::vector<SpacePtr>& summands) {
  GradedMap g;
  g.src = g.dst = summands;
  g.blocks.assign(summands.size(), std::vector<std::optional<DenseMap>>(summands.size()));
  for (size_t i = 0; i < summands.size(); ++i) g.blocks[i][i] = identity_on(S, summands[i]);
  return g;
}

GradedMap operator*(const GradedMap& a, const GradedMap& b) {
  if (a.src.size() != b.dst.size()) throw StructuralError("graded maps do not compose");
  for (size_t k = 0; k < a.src.size(); ++k)
    if (!same_space(a.src[k], b.dst[k])) throw StructuralError("graded maps do not compose at summand " + std::to_string(k));
  GradedMap g;
  g.src = b.src;
  g.dst = a.dst;
  g.blocks.assign(g.dst.size(), std::vector<std::optional<DenseMap>>(g.src.size()));
  for (size_t i = 0; i < g.dst.size(); ++i)
    for (size_t j = 0; j < g.src.size(); ++j)
      for (size_t k = 0; k < a.src.size(); ++k) {
        if (!a.blocks[i][k] || !b.blocks[k][j]) continue;
        DenseMap p = *a.blocks[i][k] * *b.blocks[k][j];
        g.blocks[i][j] = g.blocks[i][j] ? *g.blocks[i][j] + p : p;
      }
  return g;
}

GradedMap graded_tensor(const StrandSet& S, const GradedMap& a, const GradedMap& b) {
  auto spaces = [&](const std::vector<SpacePtr>& x, const std::vector<SpacePtr>& y) {
    std::vector<SpacePtr> out;
    for (auto& p : x)
      for (auto& q : y) out.push_back(tensor(S, identity_on(S, p), identity_on(S, q)).src);
    return out;
  };
  GradedMap g;
  g.src = spaces(a.src, b.src);
  g.dst = spaces(a.dst, b.dst);
  g.blocks.assign(g.dst.size(), std::vector<std::optional<DenseMap>>(g.src.size()));
  size_t nbs = b.src.size(), nbd = b.dst.size();
  for (size_t ia = 0; ia < a.dst.size(); ++ia)
    for (size_t ja = 0; ja < a.src.size(); ++ja) {
      if (!a.blocks[ia][ja]) continue;
      for (size_t ib = 0; ib < nbd; ++ib)
        for (size_t jb = 0; jb < nbs; ++jb)
          if (b.blocks[ib][jb]) g.blocks[ia * nbd + ib][ja * nbs + jb] = tensor(S, *a.blocks[ia][ja], *b.blocks[ib][jb]);
    }
  return g;
}

double graded_diff(const GradedMap& a, const GradedMap& b) {
  if (a.src.size() != b.src.size() || a.dst.size() != b.dst.size()) throw StructuralError("graded maps have different shapes");
  double worst = 0;
  for (size_t i = 0; i < a.dst.size(); ++i)
    for (size_t j = 0; j < a.src.size(); ++j) {
      auto &x = a.blocks[i][j], &y = b.blocks[i][j];
      if (x && y)
        worst = std::max(worst, max_diff(*x, *y));
      else if (x)
        worst = std::max(worst, x->max_abs());
      else if (y)
        worst = std::max(worst, y->max_abs());
    }
  return worst;
}

double graded_fit(const GradedMap& a, const GradedMap& b, cplx& c) {
  if (a.src.size() != b.src.size() || a.dst.size() != b.dst.size()) throw StructuralError("graded maps have different shapes");
  cplx ab{0};
  double bb = 0;
  for (size_t i = 0; i < a.dst.size(); ++i)
    for (size_t j = 0; j < a.src.size(); ++j)
      if (a.blocks[i][j] && b.blocks[i][j]) {
        ab += b.blocks[i][j]->M.cwiseProduct(a.blocks[i][j]->M.conjugate()).sum();
        bb += b.blocks[i][j]->M.squaredNorm();
      } else if (b.blocks[i][j]) {
        bb += b.blocks[i][j]->M.squaredNorm();
      }
  c = bb > 0 ? std::conj(ab) / bb : cplx(0);
  GradedMap cb = b;
  for (auto& row : cb.blocks)
    for (auto& blk : row)
      if (blk) *blk = c * *blk;
  return graded_diff(a, cb);
}

FullReport check_full(const FullQSystem& q, const VertexRegistry& reg, const TolerancePolicy& pol) {
  const StrandSet& S = *reg.strands;
  FullReport out;
  auto add = [&](std::string name, double res, std::string detail = "") {
    out.sections.push_back(make_section(std::move(name), "q-system-axioms", res <= pol.eq_tol, res, std::move(detail)));
  };
  GradedMap Tt = q.T.adjoint();
  add("T-isometry", graded_diff(Tt * q.T, graded_identity(S, q.T.src)));
  GradedMap St = q.S.adjoint();
  GradedMap idg = graded_identity(S, q.gamma);
  add("S-isometry", graded_diff(St * q.S, idg));
  GradedMap left = graded_tensor(S, q.S, idg) * q.S;
  GradedMap right = graded_tensor(S, idg, q.S) * q.S;
  add("associativity", graded_diff(left, right));
  cplx c1, c2;
  double r1 = graded_fit(graded_tensor(S, Tt, idg) * q.S, idg, c1);
  double r2 = graded_fit(graded_tensor(S, idg, Tt) * q.S, idg, c2);
  double res = std::max({r1, r2, std::abs(c1 - c2), std::abs(c1.imag())});
  bool positive = c1.real() > pol.eq_tol;
  out.unit_scalar = c1.real();
  out.index = positive ? 1.0 / (c1.real() * c1.real()) : 0.0;
  out.sections.push_back(make_section("unit", "q-system-axioms", res <= pol.eq_tol && positive, res,
                                      "unit=" + fmt(out.unit_scalar) + " index=" + fmt(out.index)));
  return out;
}

FullQSystem assemble_full(const QSystemCandidate& qc, const VertexRegistry& reg) {
  const StrandSet& S = *reg.strands;
  SpacePtr sig = qc.S.src;
  SpacePtr unit = S.empty(sig->start);
  FullQSystem q;
  q.gamma = {unit, sig};
  double D = 1 + qc.d;
  double a = 1 / std::sqrt(D), p = std::sqrt(qc.d / D), s = std::sqrt((D - 2) / D);
  q.T.src = {unit};
  q.T.dst = q.gamma;
  q.T.blocks = {{identity_on(S, unit)}, {std::nullopt}};
  GradedMap idg = graded_identity(S, q.gamma);
  q.S.src = q.gamma;
  q.S.dst = graded_tensor(S, idg, idg).dst;
  q.S.blocks.assign(4, std::vector<std::optional<DenseMap>>(2));
  q.S.blocks[0][0] = cplx(a) * identity_on(S, unit);
  q.S.blocks[3][0] = cplx(p) * qc.R;
  q.S.blocks[1][1] = cplx(a) * identity_on(S, sig);
  q.S.blocks[2][1] = cplx(a) * identity_on(S, sig);
  q.S.blocks[3][1] = cplx(s) * qc.S;
  return q;
}

FullQSystem canonical_qsystem(const VertexRegistry& reg) {
  DenseMap r = isometric(reg, "r_kappa");
  DenseMap rb = isometric(reg, "rbar_kappa");
  FullQSystem q;
  SpacePtr g = r.dst;
  q.gamma = {g};
  q.T.src = {r.src};
  q.T.dst = {g};
  q.T.blocks = {{r}};
  q.S.src = {g};
  q.S.dst = {reg.T({reg.id({"k"}), rb, reg.id({"kb"})}).dst};
  q.S.blocks = {{reg.T({reg.id({"k"}), rb, reg.id({"kb"})})}};
  return q;
}

}  // namespace ahcat
