#include "ihdg/pde.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace ihdg {

namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double dot(const Point& a, const Point& b, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(i)];
  return s;
}

void check_unit(const Point& n) {
  const double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
  if (std::abs(len - 1.0) > 1e-12) throw std::invalid_argument("normal must have unit length");
}

double div_or_zero(const std::function<double(const Point&)>& f, const Point& x) {
  return f ? f(x) : 0.0;
}

}  // namespace

const char* to_string(Scheme s) { return s == Scheme::ihdg1 ? "iHDG-I" : "iHDG-II"; }

Scheme parse_scheme(const std::string& name) {
  std::string k;
  for (char c : name) {
    if (c != '-' && c != '_') k += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (k == "ihdg1" || k == "ihdgi" || k == "i" || k == "1") return Scheme::ihdg1;
  if (k == "ihdg2" || k == "ihdgii" || k == "ii" || k == "2") return Scheme::ihdg2;
  throw std::invalid_argument("unknown scheme '" + name + "' (expected ihdg1 or ihdg2)");
}

int problem_dim(const ProblemSpec& p) {
  return std::visit(overloaded{[](const TransportProblem& t) { return t.dim; },
                               [](const ShallowWaterProblem&) { return 2; },
                               [](const ConvectionDiffusionProblem& c) { return c.dim; }},
                    p);
}

int num_components(const ProblemSpec& p) {
  return std::visit(overloaded{[](const TransportProblem&) { return 1; },
                               [](const ShallowWaterProblem&) { return 3; },
                               [](const ConvectionDiffusionProblem& c) { return c.dim + 1; }},
                    p);
}

bool is_time_dependent(const ProblemSpec& p) {
  return std::visit(overloaded{[](const TransportProblem& t) { return t.time_dependent; },
                               [](const ShallowWaterProblem&) { return true; },
                               [](const ConvectionDiffusionProblem& c) { return c.time_dependent; }},
                    p);
}

TimeField exact_solution(const ProblemSpec& p) {
  return std::visit(overloaded{[](const TransportProblem& t) -> TimeField {
                                 if (!t.exact) return {};
                                 return [f = t.exact](const Point& x, double time) {
                                   Values v{};
                                   v[0] = f(x, time);
                                   return v;
                                 };
                               },
                               [](const ShallowWaterProblem& s) { return s.exact; },
                               [](const ConvectionDiffusionProblem& c) { return c.exact; }},
                    p);
}

bool has_exact(const ProblemSpec& p) { return static_cast<bool>(exact_solution(p)); }

ComponentRange monitored_components(const ProblemSpec& p) {
  return std::visit(overloaded{[](const TransportProblem&) { return ComponentRange{0, 1}; },
                               [](const ShallowWaterProblem&) { return ComponentRange{0, 3}; },
                               [](const ConvectionDiffusionProblem& c) {
                                 return ComponentRange{c.dim, 1};
                               }},
                    p);
}

std::vector<std::string> component_labels(const ProblemSpec& p) {
  return std::visit(overloaded{[](const TransportProblem&) { return std::vector<std::string>{"u"}; },
                               [](const ShallowWaterProblem&) {
                                 return std::vector<std::string>{"phi", "u", "v"};
                               },
                               [](const ConvectionDiffusionProblem& c) {
                                 std::vector<std::string> l;
                                 for (int a = 0; a < c.dim; ++a) l.push_back("sigma" + std::to_string(a + 1));
                                 l.push_back("u");
                                 return l;
                               }},
                    p);
}

StructuredMesh bind_boundary(StructuredMesh mesh, const ProblemSpec& p, const ElementOperators& ops) {
  return std::visit(overloaded{[&](const TransportProblem& t) {
                                 return classify_boundary_faces(std::move(mesh), t.beta,
                                                                ops.quadrature1d().points);
                               },
                               [&](const ShallowWaterProblem&) {
                                 return tag_boundary(std::move(mesh), BoundaryTag::wall);
                               },
                               [&](const ConvectionDiffusionProblem&) {
                                 return tag_boundary(std::move(mesh), BoundaryTag::dirichlet);
                               }},
                    p);
}

Stabilization cdr_stabilization(double bn) {
  Stabilization s;
  s.bn = bn;
  s.abs_bn = std::abs(bn);
  s.alpha = std::sqrt(bn * bn + 4.0);
  s.tau = 0.5 * (s.alpha - bn);
  return s;
}

FluxMatrices upwind_flux_matrix(const ProblemSpec& p, const Point& x, const Point& n) {
  check_unit(n);
  FluxMatrices out;
  std::visit(overloaded{[&](const TransportProblem& t) {
                          const double b = dot(t.beta(x), n, t.dim);
                          out.A = Mat::Constant(1, 1, b);
                          out.absA = Mat::Constant(1, 1, std::abs(b));
                          out.eigenvalues = Vec::Constant(1, b);
                          out.R = Mat::Identity(1, 1);
                        },
                        [&](const ShallowWaterProblem& s) {
                          const double c = std::sqrt(s.Phi);
                          Mat A = Mat::Zero(3, 3);
                          A(0, 1) = A(1, 0) = c * n[0];
                          A(0, 2) = A(2, 0) = c * n[1];
                          Eigen::SelfAdjointEigenSolver<Mat> eig(A);
                          out.A = A;
                          out.eigenvalues = eig.eigenvalues();
                          out.R = eig.eigenvectors();
                          out.absA = out.R * out.eigenvalues.cwiseAbs().asDiagonal() * out.R.transpose();
                        },
                        [&](const ConvectionDiffusionProblem& c) {
                          const auto st = cdr_stabilization(dot(c.beta(x), n, c.dim));
                          out.A = Mat::Constant(1, 1, st.bn);
                          out.absA = Mat::Constant(1, 1, st.tau);
                          out.eigenvalues = Vec::Constant(1, st.bn);
                          out.R = Mat::Identity(1, 1);
                        }},
             p);
  return out;
}

StabilizationBounds stabilization_bounds(const ConvectionDiffusionProblem& p,
                                         const StructuredMesh& mesh, const ElementOperators& ops) {
  StabilizationBounds b;
  b.tau_bar = 0.0;
  b.alpha_bar = 0.0;
  b.alpha_star = 1e300;
  for (const Face& f : mesh.faces()) {
    const auto pts = ops.face_quad_points(mesh, f.owner, f.owner_local);
    for (const Point& x : pts) {
      const double bn = dot(p.beta(x), f.normal, p.dim);
      const auto st = cdr_stabilization(bn);
      b.max_abs_bn = std::max(b.max_abs_bn, st.abs_bn);
      // Both sides of the face: tau(-bn) = (alpha + bn) / 2.
      b.tau_bar = std::max({b.tau_bar, st.tau, 0.5 * (st.alpha + bn)});
      b.alpha_bar = std::max(b.alpha_bar, st.alpha);
      b.alpha_star = std::min(b.alpha_star, st.alpha);
    }
  }
  return b;
}

PointCoupling interior_coupling(const ProblemSpec& p, const Point& x, const Point& n, Scheme scheme) {
  PointCoupling c;
  const int m = num_components(p);
  c.P = Mat::Zero(m, m);
  c.R = Mat::Zero(m, m);
  c.Q = Mat::Zero(m, m);
  Mat P2 = Mat::Zero(m, m);
  Mat P1 = Mat::Zero(m, m);
  std::visit(
      overloaded{
          [&](const TransportProblem& t) {
            const double b = dot(t.beta(x), n, t.dim);
            const double ab = std::abs(b);
            P2(0, 0) = 0.5 * (b + ab);
            P1(0, 0) = b + ab;
            c.Q(0, 0) = -0.5 * (ab - b);
          },
          [&](const ShallowWaterProblem& sw) {
            const double Phi = sw.Phi;
            const double s = std::sqrt(Phi);
            P2(0, 0) = 0.5 * s;
            P2(0, 1) = 0.5 * Phi * n[0];
            P2(0, 2) = 0.5 * Phi * n[1];
            c.Q(0, 0) = -0.5 * s;
            c.Q(0, 1) = 0.5 * Phi * n[0];
            c.Q(0, 2) = 0.5 * Phi * n[1];
            for (int r = 1; r <= 2; ++r) {
              const double w = Phi * n[static_cast<std::size_t>(r - 1)];
              P2(r, 0) = 0.5 * w;
              P2(r, 1) = 0.5 * s * n[0] * w;
              P2(r, 2) = 0.5 * s * n[1] * w;
              c.Q(r, 0) = 0.5 * w;
              c.Q(r, 1) = -0.5 * s * n[0] * w;
              c.Q(r, 2) = -0.5 * s * n[1] * w;
            }
            P1(0, 0) = s;
            P1(0, 1) = Phi * n[0];
            P1(0, 2) = Phi * n[1];
          },
          [&](const ConvectionDiffusionProblem& cd) {
            const int d = cd.dim;
            const auto st = cdr_stabilization(dot(cd.beta(x), n, d));
            const double a = st.alpha;
            const double to = st.tau;
            const double tn = 0.5 * (st.alpha + st.bn);
            for (int i = 0; i < d; ++i) {
              const double ni = n[static_cast<std::size_t>(i)];
              for (int j = 0; j < d; ++j) {
                const double nj = n[static_cast<std::size_t>(j)];
                P2(i, j) = ni * nj / a;
                c.Q(i, j) = -ni * nj / a;
              }
              P2(i, d) = ni * tn / a;
              c.Q(i, d) = ni * to / a;
              P2(d, i) = ni * (1.0 - to / a);
              c.Q(d, i) = to * ni / a;
              P1(d, i) = ni;
            }
            P2(d, d) = st.bn + to - to * tn / a;
            c.Q(d, d) = -to * to / a;
            P1(d, d) = st.bn + to;
          }},
      p);
  if (scheme == Scheme::ihdg2) {
    c.P = P2;
  } else {
    c.P = P1;
    c.R = P2 - P1;
  }
  return c;
}

BoundaryCoupling boundary_coupling(const ProblemSpec& p, BoundaryTag tag, const Point& x,
                                   const Point& n, double t) {
  BoundaryCoupling bc;
  const int m = num_components(p);
  bc.P = Mat::Zero(m, m);
  std::visit(overloaded{[&](const TransportProblem& tr) {
                          const double b = dot(tr.beta(x), n, tr.dim);
                          const double ab = std::abs(b);
                          bc.P(0, 0) = 0.5 * (b + ab);
                          if (ab - b > 0.0) bc.data[0] = -0.5 * (ab - b) * tr.inflow(x, t);
                        },
                        [&](const ShallowWaterProblem& sw) {
                          if (tag != BoundaryTag::wall) {
                            throw std::invalid_argument("shallow water supports wall boundaries only");
                          }
                          const double s = std::sqrt(sw.Phi);
                          for (int r = 1; r <= 2; ++r) {
                            const double w = sw.Phi * n[static_cast<std::size_t>(r - 1)];
                            bc.P(r, 0) = w;
                            bc.P(r, 1) = s * n[0] * w;
                            bc.P(r, 2) = s * n[1] * w;
                          }
                        },
                        [&](const ConvectionDiffusionProblem& cd) {
                          const int d = cd.dim;
                          const auto st = cdr_stabilization(dot(cd.beta(x), n, d));
                          const double g = cd.dirichlet(x, t);
                          for (int i = 0; i < d; ++i) {
                            const double ni = n[static_cast<std::size_t>(i)];
                            bc.data[static_cast<std::size_t>(i)] = ni * g;
                            bc.P(d, i) = ni;
                          }
                          bc.P(d, d) = st.bn + st.tau;
                          bc.data[static_cast<std::size_t>(d)] = -st.tau * g;
                        }},
             p);
  return bc;
}

int conserved_row(const ProblemSpec& p) {
  return std::visit(overloaded{[](const TransportProblem&) { return 0; },
                               [](const ShallowWaterProblem&) { return 0; },
                               [](const ConvectionDiffusionProblem& c) { return c.dim; }},
                    p);
}

TraceFlux trace_flux(const ProblemSpec& p, const Point& x, const Point& n) {
  TraceFlux f;
  const int m = num_components(p);
  f.G = Mat::Zero(m, m);
  f.H = Vec::Zero(m);
  std::visit(overloaded{[&](const TransportProblem& t) {
                          const double b = dot(t.beta(x), n, t.dim);
                          f.G(0, 0) = b + std::abs(b);
                          f.H(0) = -std::abs(b);
                        },
                        [&](const ShallowWaterProblem& sw) {
                          const double s = std::sqrt(sw.Phi);
                          f.G(0, 0) = s;
                          f.G(0, 1) = sw.Phi * n[0];
                          f.G(0, 2) = sw.Phi * n[1];
                          f.H(0) = -s;
                          f.H(1) = sw.Phi * n[0];
                          f.H(2) = sw.Phi * n[1];
                        },
                        [&](const ConvectionDiffusionProblem& cd) {
                          const int d = cd.dim;
                          const auto st = cdr_stabilization(dot(cd.beta(x), n, d));
                          for (int i = 0; i < d; ++i) {
                            const double ni = n[static_cast<std::size_t>(i)];
                            f.H(i) = ni;
                            f.G(d, i) = ni;
                          }
                          f.G(d, d) = st.bn + st.tau;
                          f.H(d) = -st.tau;
                        }},
             p);
  return f;
}

BoundaryTrace boundary_trace(const ProblemSpec& p, BoundaryTag tag, const Point& x, const Point& n,
                             double t) {
  BoundaryTrace bt;
  std::visit(overloaded{[&](const TransportProblem& tr) {
                          const double b = dot(tr.beta(x), n, tr.dim);
                          if (b < 0.0) {
                            bt.data = tr.inflow(x, t);
                          } else {
                            bt.r[0] = 1.0;
                          }
                        },
                        [&](const ShallowWaterProblem& sw) {
                          if (tag != BoundaryTag::wall) {
                            throw std::invalid_argument("shallow water supports wall boundaries only");
                          }
                          const double s = std::sqrt(sw.Phi);
                          bt.r[0] = 1.0;
                          bt.r[1] = s * n[0];
                          bt.r[2] = s * n[1];
                        },
                        [&](const ConvectionDiffusionProblem& cd) { bt.data = cd.dirichlet(x, t); }},
             p);
  return bt;
}

namespace {

// Rows of block (ti, tj) of a component-blocked element matrix.
auto block(Mat& A, int np, int ti, int tj) { return A.block(ti * np, tj * np, np, np); }

}  // namespace

Mat volume_operator(const ProblemSpec& p, const StructuredMesh& mesh, const ElementOperators& ops,
                    int element) {
  const int np = ops.num_nodes();
  const int nq = ops.num_quad();
  const int m = num_components(p);
  const int dim = ops.dim();
  Mat L = Mat::Zero(m * np, m * np);
  const Mat& B = ops.vol_interp();
  const Vec& w = ops.vol_weights();
  const auto pts = ops.quad_points(mesh, element);

  std::visit(
      overloaded{
          [&](const TransportProblem& t) {
            // -(u, div(beta v)) = -(u, beta . grad v) - (u, div(beta) v)
            Mat WB = Mat::Zero(nq, np);
            Mat acc = Mat::Zero(np, np);
            for (int a = 0; a < dim; ++a) {
              for (int q = 0; q < nq; ++q) {
                WB.row(q) = w(q) * t.beta(pts[static_cast<std::size_t>(q)])[static_cast<std::size_t>(a)] *
                            B.row(q);
              }
              acc -= ops.vol_grad(a).transpose() * WB;
            }
            if (t.div_beta) {
              for (int q = 0; q < nq; ++q) {
                WB.row(q) = w(q) * t.div_beta(pts[static_cast<std::size_t>(q)]) * B.row(q);
              }
              acc -= B.transpose() * WB;
            }
            L = acc;
          },
          [&](const ShallowWaterProblem& sw) {
            const double Phi = sw.Phi;
            const Mat WB = w.asDiagonal() * B;
            block(L, np, 0, 1) = -Phi * ops.vol_grad(0).transpose() * WB;
            block(L, np, 0, 2) = -Phi * ops.vol_grad(1).transpose() * WB;
            block(L, np, 1, 0) = -Phi * ops.vol_grad(0).transpose() * WB;
            block(L, np, 2, 0) = -Phi * ops.vol_grad(1).transpose() * WB;
            Vec fw(nq);
            for (int q = 0; q < nq; ++q) fw(q) = w(q) * sw.coriolis(pts[static_cast<std::size_t>(q)]);
            const Mat Mf = B.transpose() * fw.asDiagonal() * B;
            block(L, np, 1, 2) = -Phi * Mf;
            block(L, np, 2, 1) = Phi * Mf;
            block(L, np, 1, 1) = sw.gamma * Phi * ops.mass();
            block(L, np, 2, 2) = sw.gamma * Phi * ops.mass();
          },
          [&](const ConvectionDiffusionProblem& cd) {
            const int d = cd.dim;
            const Mat WB = w.asDiagonal() * B;
            for (int a = 0; a < d; ++a) {
              block(L, np, a, a) = ops.mass() / cd.kappa;
              block(L, np, a, d) = -ops.vol_grad(a).transpose() * WB;
              block(L, np, d, a) = -ops.vol_grad(a).transpose() * WB;
            }
            Mat acc = Mat::Zero(np, np);
            Mat tmp(nq, np);
            for (int a = 0; a < d; ++a) {
              for (int q = 0; q < nq; ++q) {
                tmp.row(q) = w(q) * cd.beta(pts[static_cast<std::size_t>(q)])[static_cast<std::size_t>(a)] *
                             B.row(q);
              }
              acc -= ops.vol_grad(a).transpose() * tmp;
            }
            Vec r(nq);
            for (int q = 0; q < nq; ++q) {
              const Point& x = pts[static_cast<std::size_t>(q)];
              r(q) = w(q) * ((cd.nu ? cd.nu(x) : 0.0) - div_or_zero(cd.div_beta, x));
            }
            acc += B.transpose() * r.asDiagonal() * B;
            block(L, np, d, d) = acc;
          }},
      p);
  return L;
}

Mat time_mass(const ProblemSpec& p, const ElementOperators& ops) {
  const int np = ops.num_nodes();
  const int m = num_components(p);
  Mat M = Mat::Zero(m * np, m * np);
  std::visit(overloaded{[&](const TransportProblem&) { M = ops.mass(); },
                        [&](const ShallowWaterProblem& sw) {
                          block(M, np, 0, 0) = ops.mass();
                          block(M, np, 1, 1) = sw.Phi * ops.mass();
                          block(M, np, 2, 2) = sw.Phi * ops.mass();
                        },
                        [&](const ConvectionDiffusionProblem& cd) {
                          block(M, np, cd.dim, cd.dim) = ops.mass();
                        }},
             p);
  return M;
}

Vec volume_load(const ProblemSpec& p, const StructuredMesh& mesh, const ElementOperators& ops,
                int element, double t) {
  const int np = ops.num_nodes();
  const int nq = ops.num_quad();
  const int m = num_components(p);
  Vec b = Vec::Zero(m * np);
  const Mat& B = ops.vol_interp();
  const Vec& w = ops.vol_weights();
  std::visit(overloaded{[&](const TransportProblem& tr) {
                          if (!tr.forcing) return;
                          const auto pts = ops.quad_points(mesh, element);
                          Vec f(nq);
                          for (int q = 0; q < nq; ++q) f(q) = w(q) * tr.forcing(pts[static_cast<std::size_t>(q)], t);
                          b = B.transpose() * f;
                        },
                        [&](const ShallowWaterProblem& sw) {
                          const Vec ones = B.transpose() * w;
                          b.segment(np, np) = (sw.tau_x / sw.rho) * ones;
                          b.segment(2 * np, np) = (sw.tau_y / sw.rho) * ones;
                        },
                        [&](const ConvectionDiffusionProblem& cd) {
                          if (!cd.forcing) return;
                          const auto pts = ops.quad_points(mesh, element);
                          Vec f(nq);
                          for (int q = 0; q < nq; ++q) f(q) = w(q) * cd.forcing(pts[static_cast<std::size_t>(q)], t);
                          b.segment(cd.dim * np, np) = B.transpose() * f;
                        }},
             p);
  return b;
}

void validate_problem(const ProblemSpec& p, const StructuredMesh& mesh, const ElementOperators& ops,
                      int samples, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> pick(0, mesh.num_elements() - 1);
  const int count = std::min(samples, mesh.num_elements());
  for (int s = 0; s < count; ++s) {
    const int e = count == mesh.num_elements() ? s : pick(rng);
    for (const Point& x : ops.quad_points(mesh, e)) {
      std::visit(overloaded{[&](const TransportProblem& t) {
                              if (t.alpha_div > 0.0 && -div_or_zero(t.div_beta, x) < t.alpha_div) {
                                throw std::invalid_argument("declared bound -div(beta) >= alpha_div violated");
                              }
                            },
                            [&](const ShallowWaterProblem& sw) {
                              if (!(sw.Phi > 0.0) || sw.gamma < 0.0) {
                                throw std::invalid_argument("shallow water needs Phi > 0 and gamma >= 0");
                              }
                            },
                            [&](const ConvectionDiffusionProblem& cd) {
                              const double nu = cd.nu ? cd.nu(x) : 0.0;
                              if (!(cd.kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
                              if (nu - 0.5 * div_or_zero(cd.div_beta, x) < cd.lambda - 1e-14) {
                                throw std::invalid_argument("coercivity nu - div(beta)/2 >= lambda violated");
                              }
                            }},
                 p);
    }
  }
}

std::vector<std::string> preset_names() {
  return {"transport2d_diag", "transport3d_diag", "transport3d_timedep",
          "sw_standing_wave", "cdr_manufactured", "elliptic"};
}

namespace {

ConvectionDiffusionProblem sine_cdr(int dim, double kappa, VelocityField beta,
                                    std::function<double(const Point&)> div_beta) {
  // u = (1/pi) sin(pi x) cos(pi y) [sin(pi z)], -Laplace u = dim pi^2 u.
  ConvectionDiffusionProblem c;
  c.dim = dim;
  c.kappa = kappa;
  c.beta = beta;
  c.div_beta = div_beta;
  c.nu = [](const Point&) { return 1.0; };
  c.lambda = 1.0;
  auto grad = [dim](const Point& x) {
    const double sx = std::sin(kPi * x[0]), cx = std::cos(kPi * x[0]);
    const double sy = std::sin(kPi * x[1]), cy = std::cos(kPi * x[1]);
    const double sz = dim == 3 ? std::sin(kPi * x[2]) : 1.0;
    const double cz = dim == 3 ? std::cos(kPi * x[2]) : 0.0;
    Point g{cx * cy * sz, -sx * sy * sz, sx * cy * cz};
    const double u = sx * cy * sz / kPi;
    return std::pair{u, g};
  };
  c.exact = [grad, kappa, dim](const Point& x, double) {
    const auto [u, g] = grad(x);
    Values v{};
    for (int a = 0; a < dim; ++a) v[static_cast<std::size_t>(a)] = -kappa * g[static_cast<std::size_t>(a)];
    v[static_cast<std::size_t>(dim)] = u;
    return v;
  };
  c.forcing = [grad, kappa, dim, beta, div_beta](const Point& x, double) {
    const auto [u, g] = grad(x);
    const Point b = beta(x);
    double adv = 0.0;
    for (int a = 0; a < dim; ++a) adv += b[static_cast<std::size_t>(a)] * g[static_cast<std::size_t>(a)];
    return kappa * dim * kPi * kPi * u + adv + 1.0 * u;
  };
  c.dirichlet = [grad](const Point& x, double) { return grad(x).first; };
  return c;
}

}  // namespace

Preset make_preset(const std::string& name, const PresetOptions& opts) {
  Preset pr;
  pr.name = name;
  if (name == "transport2d_diag" || name == "transport3d_diag") {
    const int dim = name == "transport2d_diag" ? 2 : 3;
    TransportProblem t;
    t.dim = dim;
    t.beta = [dim](const Point&) { return dim == 2 ? Point{1.0, 1.0, 0.0} : Point{1.0, 1.0, 1.0}; };
    // u = 1 + prod sin(pi x_i): equals 1 on the inflow planes.
    t.exact = [dim](const Point& x, double) {
      double s = 1.0;
      for (int a = 0; a < dim; ++a) s *= std::sin(kPi * x[static_cast<std::size_t>(a)]);
      return 1.0 + s;
    };
    t.forcing = [dim](const Point& x, double) {
      double f = 0.0;
      for (int a = 0; a < dim; ++a) {
        double term = kPi * std::cos(kPi * x[static_cast<std::size_t>(a)]);
        for (int b = 0; b < dim; ++b) {
          if (b != a) term *= std::sin(kPi * x[static_cast<std::size_t>(b)]);
        }
        f += term;
      }
      return f;
    };
    t.inflow = t.exact;
    pr.description = "steady transport, diagonal constant velocity, smooth manufactured solution";
    pr.problem = t;
  } else if (name == "transport3d_timedep") {
    TransportProblem t;
    t.dim = 3;
    t.time_dependent = true;
    t.beta = [](const Point&) { return Point{0.2, 0.2, 0.2}; };
    t.exact = [](const Point& x, double time) {
      double r2 = 0.0;
      for (int a = 0; a < 3; ++a) {
        const double r = x[static_cast<std::size_t>(a)] - 0.35 * time;
        r2 += r * r;
      }
      return std::exp(-5.0 * r2);
    };
    // u_t + beta . grad u with u = exp(-5 |x - 0.35 t|^2) gives 1.5 sum(x_i - 0.35 t) u.
    t.forcing = [ex = t.exact](const Point& x, double time) {
      double s = 0.0;
      for (int a = 0; a < 3; ++a) s += x[static_cast<std::size_t>(a)] - 0.35 * time;
      return 1.5 * s * ex(x, time);
    };
    t.inflow = t.exact;
    pr.description = "time-dependent 3D transport of a Gaussian pulse, beta = (0.2, 0.2, 0.2)";
    pr.problem = t;
  } else if (name == "sw_standing_wave") {
    ShallowWaterProblem s;
    s.exact = [](const Point& x, double t) {
      const double r2 = std::sqrt(2.0);
      Values v{};
      v[0] = std::cos(kPi * x[0]) * std::cos(kPi * x[1]) * std::cos(r2 * kPi * t);
      v[1] = std::sin(kPi * x[0]) * std::cos(kPi * x[1]) * std::sin(r2 * kPi * t) / r2;
      v[2] = std::cos(kPi * x[0]) * std::sin(kPi * x[1]) * std::sin(r2 * kPi * t) / r2;
      return v;
    };
    pr.description = "linear standing wave in a closed unit basin, Phi = 1, no Coriolis or friction";
    pr.problem = s;
  } else if (name == "cdr_manufactured") {
    auto c = sine_cdr(
        3, opts.kappa, [](const Point& x) { return Point{1.0 + x[2], 1.0 + x[0], 1.0 + x[1]}; },
        [](const Point&) { return 0.0; });
    pr.description = "3D convection-diffusion-reaction, beta = (1+z, 1+x, 1+y), nu = 1";
    pr.problem = c;
  } else if (name == "elliptic") {
    const int dim = opts.dim == 0 ? 2 : opts.dim;
    if (dim < 2 || dim > 3) throw std::invalid_argument("elliptic preset supports dim 2 or 3");
    auto c = sine_cdr(dim, 1.0, [](const Point&) { return Point{0.0, 0.0, 0.0}; },
                      [](const Point&) { return 0.0; });
    pr.description = "diffusion-reaction, kappa = 1, beta = 0, nu = 1";
    pr.problem = c;
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  return pr;
}

}  // namespace ihdg
