#include "fracorn/korn.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "fracorn/quadrature.hpp"

namespace fracorn {

namespace {

constexpr double kPi = 3.14159265358979323846;

int skew_count(int n) { return n == 2 ? 1 : 3; }

// Values of the rigid parameter fields e_1..e_n, rot_1..rot_na at x.
void rigid_param_values(int n, const Vec& x, Vec* out) {
  for (int c = 0; c < n; ++c) {
    out[c] = Vec::zero(n);
    out[c][c] = 1.0;
  }
  int na = skew_count(n);
  for (int k = 0; k < na; ++k) {
    RigidMotion r;
    r.n = n;
    r.b = Vec::zero(n);
    r.a[static_cast<size_t>(k)] = 1.0;
    out[n + k] = r.apply(x);
  }
}

RigidMotion rigid_from_coefs(int n, const Eigen::VectorXd& c) {
  RigidMotion r;
  r.n = n;
  r.b = Vec::zero(n);
  for (int i = 0; i < n; ++i) r.b[i] = c[i];
  for (int k = 0; k < skew_count(n); ++k) r.a[static_cast<size_t>(k)] = c[n + k];
  return r;
}

}  // namespace

// -------------------------------------------------------------- rigid fit --

RigidFit rigid_project_lp(const VectorField& u, const Grid& grid, double p) {
  if (!(p > 1.0)) throw ConfigError("rigid_project_lp: p must exceed 1");
  int n = grid.n();
  if (u.n() != n) throw ConfigError("rigid_project_lp: dimension mismatch");
  int m = n + skew_count(n);

  // cache u and the parameter fields on the cell centers
  const auto& cells = grid.cells();
  size_t N = cells.size();
  std::vector<Vec> uval(N);
  std::vector<std::array<Vec, 7>> pval(N);
  for (size_t i = 0; i < N; ++i) {
    uval[i] = u(cells[i].center);
    rigid_param_values(n, cells[i].center, pval[i].data());
  }

  auto solve_weighted = [&](const std::vector<double>& w) {
    Eigen::MatrixXd Nm = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd F = Eigen::VectorXd::Zero(m);
    for (size_t i = 0; i < N; ++i) {
      double wm = w[i] * cells[i].volume;
      for (int a = 0; a < m; ++a) {
        F[a] += wm * pval[i][static_cast<size_t>(a)].dot(uval[i]);
        for (int b = a; b < m; ++b)
          Nm(a, b) += wm * pval[i][static_cast<size_t>(a)].dot(pval[i][static_cast<size_t>(b)]);
      }
    }
    Nm = Nm.selfadjointView<Eigen::Upper>();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(Nm);
    if (ldlt.info() != Eigen::Success)
      throw NumericError("rigid_project_lp: degenerate normal equations");
    return Eigen::VectorXd(ldlt.solve(F));
  };
  auto residual_at = [&](size_t i, const Eigen::VectorXd& c) {
    Vec r = uval[i];
    for (int a = 0; a < m; ++a) r -= c[a] * pval[i][static_cast<size_t>(a)];
    return r;
  };
  auto objective = [&](const Eigen::VectorXd& c) {
    double J = 0.0;
    for (size_t i = 0; i < N; ++i)
      J += cells[i].volume * std::pow(residual_at(i, c).squaredNorm(), 0.5 * p);
    return J;
  };

  std::vector<double> w(N, 1.0);
  Eigen::VectorXd c = solve_weighted(w);  // exact for p = 2, warm start otherwise
  RigidFit fit;
  fit.iterations = 1;
  if (std::abs(p - 2.0) > 1e-14) {
    double J = objective(c);
    bool converged = false;
    for (int it = 0; it < 200; ++it) {
      for (size_t i = 0; i < N; ++i)
        w[i] = std::pow(std::max(residual_at(i, c).norm(), 1e-12), p - 2.0);
      Eigen::VectorXd cn = solve_weighted(w);
      double Jn = objective(cn);
      if (Jn > J) {  // damp the reweighted step once
        cn = 0.5 * (c + cn);
        Jn = objective(cn);
      }
      double step = (cn - c).lpNorm<Eigen::Infinity>();
      c = cn;
      J = Jn;
      fit.iterations = it + 2;
      if (step < 1e-8) {
        converged = true;
        break;
      }
    }
    fit.converged = converged;
  }
  fit.r = rigid_from_coefs(n, c);
  fit.residual = std::pow(objective(c), 1.0 / p);
  return fit;
}

// --------------------------------------------------- seminorm projection --

namespace {

double seminorm_power_minus_rotation(const VectorField& u, const Grid& grid,
                                     const FracParams& par, const Eigen::VectorXd& a) {
  int n = grid.n();
  int na = skew_count(n);
  std::vector<VectorField> fields;
  std::vector<double> coefs;
  fields.push_back(u);
  coefs.push_back(1.0);
  for (int k = 0; k < na; ++k) {
    RigidMotion r;
    r.n = n;
    r.b = Vec::zero(n);
    r.a[static_cast<size_t>(k)] = 1.0;
    fields.push_back(r.as_field());
    coefs.push_back(-a[k]);
  }
  return gagliardo(VectorField::linear_combination(std::move(fields), std::move(coefs)), grid,
                   par)
      .raw_p_power;
}

}  // namespace

SkewFit rigid_project_seminorm(const VectorField& u, const Grid& grid, const FracParams& par) {
  int n = grid.n();
  if (u.n() != n || par.n != n) throw ConfigError("rigid_project_seminorm: dimension mismatch");
  int na = skew_count(n);

  // Closed form at p = 2 from the polarized bilinear form; also the warm
  // start for the descent at other p.
  std::vector<VectorField> fields;
  fields.push_back(u);
  for (int k = 0; k < na; ++k) {
    RigidMotion r;
    r.n = n;
    r.b = Vec::zero(n);
    r.a[static_cast<size_t>(k)] = 1.0;
    fields.push_back(r.as_field());
  }
  Eigen::MatrixXd W, X;
  assemble_pair_forms(fields, grid, par.s, 4, W, X);
  Eigen::MatrixXd Wrr = W.block(1, 1, na, na);
  Eigen::LLT<Eigen::MatrixXd> llt(Wrr);
  if (llt.info() != Eigen::Success)
    throw NumericError("rigid_project_seminorm: rotation Gram not positive definite");
  Eigen::VectorXd wu = W.col(0).segment(1, na);
  Eigen::VectorXd a = llt.solve(wu);

  SkewFit fit;
  fit.iterations = 1;
  if (std::abs(par.p - 2.0) < 1e-14) {
    double J = W(0, 0) - 2.0 * a.dot(wu) + a.dot(Wrr * a);
    fit.value = std::sqrt(std::max(J, 0.0));
  } else {
    auto J = [&](const Eigen::VectorXd& v) {
      return seminorm_power_minus_rotation(u, grid, par, v);
    };
    double Jcur = J(a);
    bool converged = false;
    for (int it = 0; it < 200; ++it) {
      // central finite-difference gradient
      Eigen::VectorXd g(na);
      double fd = 1e-5 * (1.0 + a.lpNorm<Eigen::Infinity>());
      for (int k = 0; k < na; ++k) {
        Eigen::VectorXd ap = a, am = a;
        ap[k] += fd;
        am[k] -= fd;
        g[k] = (J(ap) - J(am)) / (2.0 * fd);
      }
      if (g.lpNorm<Eigen::Infinity>() < 1e-8 * std::max(1.0, Jcur)) {
        converged = true;
        fit.iterations = it + 1;
        break;
      }
      double t = 1.0;
      double gn2 = g.squaredNorm();
      Eigen::VectorXd an;
      double Jn = Jcur;
      for (int bt = 0; bt < 40; ++bt) {
        an = a - t * g;
        Jn = J(an);
        if (Jn <= Jcur - 1e-4 * t * gn2) break;
        t *= 0.5;
      }
      double step = (an - a).lpNorm<Eigen::Infinity>();
      a = an;
      Jcur = Jn;
      fit.iterations = it + 1;
      if (step < 1e-8) {
        converged = true;
        break;
      }
    }
    fit.converged = converged;
    fit.value = std::pow(Jcur, 1.0 / par.p);
  }
  RigidMotion r;
  r.n = n;
  r.b = Vec::zero(n);
  for (int k = 0; k < na; ++k) r.a[static_cast<size_t>(k)] = a[k];
  fit.r = r;
  return fit;
}

// --------------------------------------------------------------- assembly --

namespace {

// Accumulates the W and X bilinear forms of a generic field list in one
// sweep; each tile clone owns its scratch, so accumulate stays reentrant.
class FieldGramAcc final : public PairAccumulator {
 public:
  FieldGramAcc(const std::vector<VectorField>* fields, int n)
      : fields_(fields),
        n_(n),
        m_(static_cast<int>(fields->size())),
        W_(Eigen::MatrixXd::Zero(m_, m_)),
        X_(Eigen::MatrixXd::Zero(m_, m_)),
        dv_(static_cast<size_t>(m_)),
        t_(static_cast<size_t>(m_)) {}

  std::unique_ptr<PairAccumulator> clone_empty() const override {
    return std::make_unique<FieldGramAcc>(fields_, n_);
  }

  void accumulate(const Vec& x, const Vec& y, double w) override {
    Vec e = y - x;
    double r = e.norm();
    for (int i = 0; i < m_; ++i) {
      const VectorField& f = (*fields_)[static_cast<size_t>(i)];
      dv_[static_cast<size_t>(i)] = f(y) - f(x);
      t_[static_cast<size_t>(i)] = dv_[static_cast<size_t>(i)].dot(e) / r;
    }
    for (int i = 0; i < m_; ++i)
      for (int j = i; j < m_; ++j) {
        W_(i, j) += dv_[static_cast<size_t>(i)].dot(dv_[static_cast<size_t>(j)]) * w;
        X_(i, j) += t_[static_cast<size_t>(i)] * t_[static_cast<size_t>(j)] * w;
      }
  }

  void merge(const PairAccumulator& other) override {
    const auto& o = static_cast<const FieldGramAcc&>(other);
    W_ += o.W_;
    X_ += o.X_;
  }

  const Eigen::MatrixXd& W() const { return W_; }
  const Eigen::MatrixXd& X() const { return X_; }

 private:
  const std::vector<VectorField>* fields_;
  int n_;
  int m_;
  Eigen::MatrixXd W_, X_;
  std::vector<Vec> dv_;
  std::vector<double> t_;
};

void check_finite(const Eigen::MatrixXd& A, const char* what) {
  if (!A.allFinite()) throw NumericError(std::string("assembly produced non-finite ") + what);
}

}  // namespace

void assemble_pair_forms(const std::vector<VectorField>& fields, const Grid& grid, double s,
                         int refine_depth, Eigen::MatrixXd& W_out, Eigen::MatrixXd& X_out) {
  if (fields.empty()) throw ConfigError("assemble_pair_forms: empty field list");
  for (const auto& f : fields)
    if (f.n() != grid.n()) throw ConfigError("assemble_pair_forms: field dimension mismatch");
  if (!(s > 0.0) || !(s < 1.0)) throw ConfigError("assemble_pair_forms: s must lie in (0,1)");
  FieldGramAcc acc(&fields, grid.n());
  pair_sweep(grid, grid, 2.0 * s, refine_depth, acc);
  int m = static_cast<int>(fields.size());
  W_out = acc.W().selfadjointView<Eigen::Upper>();
  X_out = acc.X().selfadjointView<Eigen::Upper>();
  (void)m;
  check_finite(W_out, "Gagliardo form");
  check_finite(X_out, "projected form");
}

namespace {

// Structural mirror of make_basis: constants, rotations about the box
// center, then cosine modes grouped by max degree (component-major, the
// same odometer order).  Evaluating through the mirror costs n cosine
// tables instead of m closure calls per point.
struct BasisMeta {
  int n = 2;
  int K = 0;
  Vec lo, hi;
  int nconst = 0;
  int nrot = 0;
  std::vector<RigidMotion> rots;
  struct Mode {
    int comp;
    std::array<double, kMaxDim> d;
  };
  std::vector<Mode> modes;
  int m = 0;

  static BasisMeta build(const BasisSet& b) {
    BasisMeta meta;
    meta.n = b.n;
    meta.K = b.K;
    meta.lo = b.lo;
    meta.hi = b.hi;
    meta.nconst = b.n;
    meta.nrot = skew_count(b.n);
    Vec ctr = Vec::zero(b.n);
    for (int i = 0; i < b.n; ++i) ctr[i] = 0.5 * (b.lo[i] + b.hi[i]);
    for (int k = 0; k < meta.nrot; ++k) {
      RigidMotion r;
      r.n = b.n;
      r.a[static_cast<size_t>(k)] = 1.0;
      r.b = Vec::zero(b.n);
      Vec shift = r.apply(ctr);
      r.b -= shift;
      meta.rots.push_back(r);
    }
    for (int md = 1; md <= b.K; ++md) {
      for (int c = 0; c < b.n; ++c) {
        std::array<int, kMaxDim> d{};
        while (true) {
          int mx = 0;
          for (int i = 0; i < b.n; ++i) mx = std::max(mx, d[static_cast<size_t>(i)]);
          if (mx == md) {
            Mode mo;
            mo.comp = c;
            mo.d.fill(0.0);
            for (int i = 0; i < b.n; ++i) mo.d[static_cast<size_t>(i)] = d[static_cast<size_t>(i)];
            meta.modes.push_back(mo);
          }
          int ax = 0;
          while (ax < b.n && ++d[static_cast<size_t>(ax)] > md) {
            d[static_cast<size_t>(ax)] = 0;
            ++ax;
          }
          if (ax == b.n) break;
        }
      }
    }
    meta.m = meta.nconst + meta.nrot + static_cast<int>(meta.modes.size());
    if (meta.m != static_cast<int>(b.fields.size()))
      throw ConfigError("assemble_gram: basis layout does not match the mode-basis convention");
    return meta;
  }

  // vals must hold m entries.
  void values(const Vec& x, Vec* vals) const {
    for (int c = 0; c < nconst; ++c) {
      vals[c] = Vec::zero(n);
      vals[c][c] = 1.0;
    }
    for (int k = 0; k < nrot; ++k) vals[nconst + k] = rots[static_cast<size_t>(k)].apply(x);
    double tbl[kMaxDim][16];
    for (int i = 0; i < n; ++i) {
      double xi = (x[i] - lo[i]) / (hi[i] - lo[i]);
      for (int dd = 0; dd <= K; ++dd)
        tbl[i][dd] = std::cos(kPi * static_cast<double>(dd) * xi);
    }
    int base = nconst + nrot;
    for (size_t j = 0; j < modes.size(); ++j) {
      const Mode& mo = modes[j];
      double v = tbl[0][static_cast<int>(mo.d[0])];
      for (int i = 1; i < n; ++i) v *= tbl[i][static_cast<int>(mo.d[static_cast<size_t>(i)])];
      Vec& out = vals[base + static_cast<int>(j)];
      out = Vec::zero(n);
      out[mo.comp] = v;
    }
  }
};

class BasisGramAcc final : public PairAccumulator {
 public:
  explicit BasisGramAcc(std::shared_ptr<const BasisMeta> meta)
      : meta_(std::move(meta)),
        m_(meta_->m),
        W_(Eigen::MatrixXd::Zero(m_, m_)),
        X_(Eigen::MatrixXd::Zero(m_, m_)),
        vx_(static_cast<size_t>(m_)),
        vy_(static_cast<size_t>(m_)),
        dv_(static_cast<size_t>(m_)),
        t_(static_cast<size_t>(m_)) {}

  std::unique_ptr<PairAccumulator> clone_empty() const override {
    return std::make_unique<BasisGramAcc>(meta_);
  }

  void accumulate(const Vec& x, const Vec& y, double w) override {
    meta_->values(x, vx_.data());
    meta_->values(y, vy_.data());
    Vec e = y - x;
    double r = e.norm();
    for (int i = 0; i < m_; ++i) {
      dv_[static_cast<size_t>(i)] = vy_[static_cast<size_t>(i)] - vx_[static_cast<size_t>(i)];
      t_[static_cast<size_t>(i)] = dv_[static_cast<size_t>(i)].dot(e) / r;
    }
    for (int i = 0; i < m_; ++i)
      for (int j = i; j < m_; ++j) {
        W_(i, j) += dv_[static_cast<size_t>(i)].dot(dv_[static_cast<size_t>(j)]) * w;
        X_(i, j) += t_[static_cast<size_t>(i)] * t_[static_cast<size_t>(j)] * w;
      }
  }

  void merge(const PairAccumulator& other) override {
    const auto& o = static_cast<const BasisGramAcc&>(other);
    W_ += o.W_;
    X_ += o.X_;
  }

  const Eigen::MatrixXd& W() const { return W_; }
  const Eigen::MatrixXd& X() const { return X_; }

 private:
  std::shared_ptr<const BasisMeta> meta_;
  int m_;
  Eigen::MatrixXd W_, X_;
  std::vector<Vec> vx_, vy_, dv_;
  std::vector<double> t_;
};

}  // namespace

GramForms assemble_gram(const BasisSet& basis, const Grid& grid, double s, int refine_depth) {
  if (basis.n != grid.n()) throw ConfigError("assemble_gram: basis/grid dimension mismatch");
  if (basis.K > 15) throw ConfigError("assemble_gram: degree exceeds the cosine table size");
  auto meta = std::make_shared<const BasisMeta>(BasisMeta::build(basis));
  int m = meta->m;

  BasisGramAcc acc(meta);
  pair_sweep(grid, grid, 2.0 * s, refine_depth, acc);

  GramForms forms;
  forms.basis = basis;
  forms.h = grid.h();
  forms.s = s;
  forms.refine_depth = refine_depth;
  forms.W = acc.W().selfadjointView<Eigen::Upper>();
  forms.X = acc.X().selfadjointView<Eigen::Upper>();

  // mass matrix: plain midpoint, serial
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
  std::vector<Vec> vals(static_cast<size_t>(m));
  for (const auto& cell : grid.cells()) {
    meta->values(cell.center, vals.data());
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j)
        M(i, j) += vals[static_cast<size_t>(i)].dot(vals[static_cast<size_t>(j)]) * cell.volume;
  }
  forms.M = M.selfadjointView<Eigen::Upper>();

  check_finite(forms.W, "Gagliardo form");
  check_finite(forms.X, "projected form");
  check_finite(forms.M, "mass matrix");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(forms.M);
  if (es.info() != Eigen::Success) throw NumericError("assemble_gram: mass eigensolve failed");
  double lo_ev = es.eigenvalues().minCoeff(), hi_ev = es.eigenvalues().maxCoeff();
  if (!(lo_ev > 0.0) || hi_ev / lo_ev > 1e12)
    throw ConfigError("assemble_gram: mass matrix condition number exceeds the cap; "
                      "refine the grid or lower the basis degree");
  return forms;
}

double max_generalized_eig(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::LLT<Eigen::MatrixXd> llt(B);
  if (llt.info() != Eigen::Success)
    throw NumericError("max_generalized_eig: right-hand form not positive definite");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(A, B);
  if (ges.info() != Eigen::Success) throw NumericError("max_generalized_eig: eigensolve failed");
  return ges.eigenvalues().maxCoeff();
}

// -------------------------------------------------------------- estimates --

ConstantEstimate estimate_korn2_constant(const GramForms& forms, const std::string& method,
                                         int samples, uint64_t seed) {
  Eigen::MatrixXd B = forms.X + forms.M;
  ConstantEstimate est;
  est.name = "C2";
  est.h = forms.h;
  est.degree = forms.basis.K;
  est.method = method;
  if (method == "eig") {
    est.value = max_generalized_eig(forms.W, B);
    return est;
  }
  if (method != "random-search")
    throw ConfigError("estimate_korn2_constant: unknown method '" + method + "'");
  if (samples < 1) throw ConfigError("estimate_korn2_constant: need at least one sample");
  Rng rng(seed);
  int m = static_cast<int>(forms.W.rows());
  double best = 0.0;
  for (int it = 0; it < samples; ++it) {
    Eigen::VectorXd c(m);
    for (int i = 0; i < m; ++i) c[i] = rng.normal();
    double den = c.dot(B * c);
    if (den < 1e-300) continue;
    best = std::max(best, c.dot(forms.W * c) / den);
  }
  est.value = best;
  return est;
}

ConstantEstimate korn2_lower_bound_lp(const BasisSet& basis, const Grid& grid,
                                      const FracParams& par, int samples, uint64_t seed) {
  if (samples < 1) throw ConfigError("korn2_lower_bound_lp: need at least one sample");
  Rng rng(seed);
  int m = static_cast<int>(basis.fields.size());
  double best = 0.0;
  for (int it = 0; it < samples; ++it) {
    std::vector<double> c(static_cast<size_t>(m));
    double norm2 = 0.0;
    for (auto& v : c) {
      v = rng.normal();
      norm2 += v * v;
    }
    double inv = 1.0 / std::sqrt(norm2);
    for (auto& v : c) v *= inv;
    VectorField uc = VectorField::linear_combination(basis.fields, c);
    double num = gagliardo(uc, grid, par).raw_p_power;
    double den = projected(uc, grid, par).raw_p_power + std::pow(lp_norm(uc, grid, par.p), par.p);
    if (den < 1e-300) continue;
    best = std::max(best, num / den);
  }
  ConstantEstimate est;
  est.name = "C2";
  est.value = best;
  est.h = grid.h();
  est.degree = basis.K;
  est.method = "random-search";
  return est;
}

namespace {

struct Deflation {
  Eigen::MatrixXd Z;              // m x (m - nr): mass-orthogonal complement basis
  std::vector<int> rigid, rest;   // index split
};

Deflation deflate_rigid(const GramForms& forms) {
  int m = static_cast<int>(forms.W.rows());
  Deflation d;
  std::vector<char> is_rigid(static_cast<size_t>(m), 0);
  for (size_t r : forms.basis.rigid_indices) is_rigid[r] = 1;
  for (int i = 0; i < m; ++i) (is_rigid[static_cast<size_t>(i)] ? d.rigid : d.rest).push_back(i);
  int nr = static_cast<int>(d.rigid.size());
  int nc = static_cast<int>(d.rest.size());
  if (nc == 0)
    throw ConfigError("rigid deflation: basis has no non-rigid directions; raise the degree");
  Eigen::MatrixXd Mrr(nr, nr), Mrc(nr, nc);
  for (int a = 0; a < nr; ++a) {
    for (int b = 0; b < nr; ++b) Mrr(a, b) = forms.M(d.rigid[a], d.rigid[b]);
    for (int j = 0; j < nc; ++j) Mrc(a, j) = forms.M(d.rigid[a], d.rest[j]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(Mrr);
  if (llt.info() != Eigen::Success)
    throw NumericError("rigid deflation: rigid mass block not positive definite");
  Eigen::MatrixXd alpha = llt.solve(Mrc);  // nr x nc
  d.Z = Eigen::MatrixXd::Zero(m, nc);
  for (int j = 0; j < nc; ++j) {
    d.Z(d.rest[static_cast<size_t>(j)], j) = 1.0;
    for (int a = 0; a < nr; ++a) d.Z(d.rigid[static_cast<size_t>(a)], j) = -alpha(a, j);
  }
  return d;
}

// A - A(:,R) pinv(A(R,R)) A(R,:), the quadratic form of min over the rigid
// coefficients; the rigid block may be singular (constants have zero
// seminorm rows), hence the spectral pseudo-inverse.
Eigen::MatrixXd rigid_schur(const Eigen::MatrixXd& A, const std::vector<int>& rigid) {
  int m = static_cast<int>(A.rows());
  int nr = static_cast<int>(rigid.size());
  Eigen::MatrixXd Arr(nr, nr), Arf(nr, m);
  for (int a = 0; a < nr; ++a) {
    for (int b = 0; b < nr; ++b) Arr(a, b) = A(rigid[static_cast<size_t>(a)], rigid[static_cast<size_t>(b)]);
    Arf.row(a) = A.row(rigid[static_cast<size_t>(a)]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Arr);
  if (es.info() != Eigen::Success) throw NumericError("rigid deflation: block eigensolve failed");
  double tol = 1e-12 * std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
  Eigen::VectorXd inv = es.eigenvalues();
  for (int i = 0; i < nr; ++i) inv[i] = inv[i] > tol ? 1.0 / inv[i] : 0.0;
  Eigen::MatrixXd pinv =
      es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  Eigen::MatrixXd S = A - Arf.transpose() * pinv * Arf;
  return 0.5 * (S + S.transpose());
}

}  // namespace

Korn1Result estimate_korn1_constant(const GramForms& forms) {
  Deflation d = deflate_rigid(forms);
  Eigen::MatrixXd num = d.Z.transpose() * rigid_schur(forms.W, d.rigid) * d.Z;
  Eigen::MatrixXd den = d.Z.transpose() * forms.X * d.Z;
  num = 0.5 * (num + num.transpose());
  den = 0.5 * (den + den.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(den);
  if (llt.info() != Eigen::Success)
    throw NumericError("estimate_korn1_constant: deflated projected form not positive definite; "
                       "the grid resolves no gap between the span and the rigid class");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(num, den);
  if (ges.info() != Eigen::Success)
    throw NumericError("estimate_korn1_constant: eigensolve failed");
  int last = static_cast<int>(ges.eigenvalues().size()) - 1;
  Korn1Result out;
  out.estimate.name = "C1";
  out.estimate.value = ges.eigenvalues()[last];
  out.estimate.h = forms.h;
  out.estimate.degree = forms.basis.K;
  out.estimate.method = "eig";
  out.top_coefs = d.Z * ges.eigenvectors().col(last);
  return out;
}

ConstantEstimate korn_poincare_constant(const GramForms& forms) {
  Deflation d = deflate_rigid(forms);
  Eigen::MatrixXd num = d.Z.transpose() * rigid_schur(forms.M, d.rigid) * d.Z;
  Eigen::MatrixXd den = d.Z.transpose() * forms.X * d.Z;
  num = 0.5 * (num + num.transpose());
  den = 0.5 * (den + den.transpose());
  double lam = max_generalized_eig(num, den);
  ConstantEstimate est;
  est.name = "KornPoincare";
  est.value = std::sqrt(std::max(lam, 0.0));  // norm ratio, scales like tau^s
  est.h = forms.h;
  est.degree = forms.basis.K;
  est.method = "eig";
  return est;
}

// --------------------------------------------------------------- Galerkin --

PeridynamicSolution solve_peridynamic(const VectorField& fext, const Domain& omega,
                                      const CutoffFn& chi, const BasisSet& basis,
                                      const Grid& grid, double s, int refine_depth) {
  int n = grid.n();
  if (fext.n() != n || chi.n() != n || basis.n != n)
    throw ConfigError("solve_peridynamic: dimension mismatch");
  if (omega.n() != n) throw ConfigError("solve_peridynamic: constrained region dimension");

  // the cutoff must vanish on the constrained region
  {
    auto [blo, bhi] = omega.bounding_box();
    Rng rng(77);
    int found = 0;
    for (int tries = 0; tries < 6400 && found < 64; ++tries) {
      Vec x = Vec::zero(n);
      for (int i = 0; i < n; ++i) x[i] = rng.uniform(blo[i], bhi[i]);
      if (!omega.contains(x)) continue;
      ++found;
      if (std::abs(chi(x)) > 1e-12)
        throw ConfigError("solve_peridynamic: cutoff does not vanish on the constrained region");
    }
    if (found == 0)
      throw ConfigError("solve_peridynamic: constrained region appears empty");
  }

  PeridynamicSolution sol;
  sol.constrained.reserve(basis.fields.size());
  for (const auto& f : basis.fields)
    sol.constrained.push_back(VectorField::cutoff_product(chi, f));
  int m = static_cast<int>(sol.constrained.size());

  Eigen::MatrixXd W, X;
  assemble_pair_forms(sol.constrained, grid, s, refine_depth, W, X);
  sol.G = X;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sol.G);
  if (es.info() != Eigen::Success) throw NumericError("solve_peridynamic: eigensolve failed");
  if (es.eigenvalues().minCoeff() <= 1e-12 * std::max(sol.G.trace(), 1e-300))
    throw ConfigError("solve_peridynamic: singular energy form on the constrained span "
                      "(a rigid or null combination survived the cutoff)");

  sol.load = Eigen::VectorXd(m);
  for (int i = 0; i < m; ++i) {
    const VectorField& psi = sol.constrained[static_cast<size_t>(i)];
    sol.load[i] = single_integral(grid, [&](const Vec& x) { return fext(x).dot(psi(x)); });
  }

  Eigen::VectorXd rhs = 0.5 * sol.load;
  Eigen::LLT<Eigen::MatrixXd> llt(sol.G);
  if (llt.info() != Eigen::Success)
    throw NumericError("solve_peridynamic: energy form factorization failed");
  sol.coefs = llt.solve(rhs);
  sol.residual = (sol.G * sol.coefs - rhs).norm() / std::max(rhs.norm(), 1e-300);
  sol.energy = sol.coefs.dot(sol.G * sol.coefs) - sol.load.dot(sol.coefs);

  std::vector<double> cv(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) cv[static_cast<size_t>(i)] = sol.coefs[i];
  sol.u = VectorField::linear_combination(sol.constrained, cv);
  return sol;
}

}  // namespace fracorn
