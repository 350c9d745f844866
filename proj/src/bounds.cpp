#include "polymin/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "polymin/rng.hpp"
#include "polymin/sos.hpp"

namespace polymin {

std::string ToString(CjSource source) {
  switch (source) {
    case CjSource::CoefficientNorm: return "CoefficientNorm";
    case CjSource::MonomialRefined: return "MonomialRefined";
    case CjSource::SphereSos: return "SphereSos";
    case CjSource::NieBound: return "NieBound";
    case CjSource::Max: return "Max";
  }
  return "?";
}

std::string ToString(Definiteness d) {
  switch (d) {
    case Definiteness::CertifiedPositive: return "CertifiedPositive";
    case Definiteness::CertifiedNotPsd: return "CertifiedNotPsd";
    case Definiteness::Undecided: return "Undecided";
  }
  return "?";
}

DegreeError::DegreeError(int degree)
    : std::invalid_argument("norm bound needs even positive degree, got " +
                            std::to_string(degree)),
      degree_(degree) {}

std::vector<double> CjVector::values() const {
  std::vector<double> v;
  v.reserve(entries.size());
  for (const CjEntry& e : entries) v.push_back(e.value);
  return v;
}

double CjCoefficientNorm(const Polynomial& fj) { return -OneNorm(fj); }

std::vector<double> MonomialSphereMaximizer(const Monomial& alpha, double p) {
  if (alpha.is_constant()) {
    throw std::invalid_argument("MonomialSphereMaximizer: alpha = 0");
  }
  if (!(p >= 1.0)) throw std::invalid_argument("MonomialSphereMaximizer: p < 1");
  std::vector<double> x(alpha.num_vars());
  for (int i = 0; i < alpha.num_vars(); ++i) {
    x[i] = std::pow(static_cast<double>(alpha[i]) / alpha.degree(), 1.0 / p);
  }
  return x;
}

double MonomialSphereMax(const Monomial& alpha, double p) {
  if (alpha.is_constant()) return 1.0;
  double v = 1.0;
  for (int i = 0; i < alpha.num_vars(); ++i) {
    if (alpha[i] == 0) continue;
    v *= std::pow(static_cast<double>(alpha[i]) / alpha.degree(), alpha[i] / p);
  }
  return v;
}

double CjMonomialRefined(const Polynomial& fj, double p) {
  double c = 0.0;
  for (const auto& [m, a] : fj.terms()) c -= std::abs(a) * MonomialSphereMax(m, p);
  return c;
}

namespace {

// Picks the largest candidate; exact-enough ties are tagged Max.
void Finalize(CjEntry& e) {
  std::vector<std::pair<double, CjSource>> cands = {
      {e.coefficient_norm, CjSource::CoefficientNorm},
      {e.monomial_refined, CjSource::MonomialRefined}};
  if (e.sphere_sos) cands.emplace_back(*e.sphere_sos, CjSource::SphereSos);
  if (e.nie) cands.emplace_back(*e.nie, CjSource::NieBound);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& [v, s] : cands) best = std::max(best, v);
  int at_best = 0;
  for (const auto& [v, s] : cands) {
    if (v >= best - 1e-12 * (1.0 + std::abs(best))) {
      ++at_best;
      e.source = s;
    }
  }
  if (at_best > 1) e.source = CjSource::Max;
  e.value = best;
}

CjEntry AlgebraicEntry(const Polynomial& fj, int j, double p) {
  CjEntry e;
  e.degree = j;
  e.coefficient_norm = CjCoefficientNorm(fj);
  e.monomial_refined = CjMonomialRefined(fj, p);
  Finalize(e);
  return e;
}

void MergeSphereSos(CjEntry& e, const SosBound& b) {
  if (!b.ok()) return;
  e.sphere_sos = std::max(e.sphere_sos.value_or(-std::numeric_limits<double>::infinity()),
                          b.validated_value);
  Finalize(e);
}

// f_d >= gamma * sum x_i^d + slack on the unit p-sphere, and sum x_i^d ranges
// over [n^(1 - d/p), 1] when d >= p and [1, n^(1 - d/p)] otherwise.
double NieOnSphere(const SosBound& nie, int n, int d, int p) {
  const double scale = std::pow(static_cast<double>(n), 1.0 - static_cast<double>(d) / p);
  const double lo = std::min(1.0, scale);
  const double hi = std::max(1.0, scale);
  const double slack = nie.validated_value - nie.value;
  return nie.value * (nie.value >= 0.0 ? lo : hi) + slack;
}

void MergeNie(CjEntry& e, const SosBound& nie, int n, int d, int p) {
  if (!nie.ok()) return;
  e.nie = NieOnSphere(nie, n, d, p);
  Finalize(e);
}

std::vector<Polynomial> ComponentsUpTo(const Polynomial& f, int d) {
  std::vector<Polynomial> out(d + 1, Polynomial(f.num_vars()));
  for (const auto& c : HomogeneousComponents(f)) out[c.degree] = c.poly;
  return out;
}

// Sphere SOS entries for j in [1, top] in parallel; algebraic only when p is odd.
std::vector<CjEntry> Entries(const std::vector<Polynomial>& comps, int top, int p, int k,
                             const SdpOptions& options) {
  std::vector<CjEntry> entries(top);
  for (int j = 1; j <= top; ++j) entries[j - 1] = AlgebraicEntry(comps[j], j, p);
  if (p < 2 || p % 2 != 0) return entries;
#pragma omp parallel for schedule(dynamic, 1)
  for (int j = 1; j <= top; ++j) {
    if (comps[j].is_zero()) continue;
    MergeSphereSos(entries[j - 1], SphereMinBound(comps[j], p, k, options));
  }
  return entries;
}

double PNorm(const std::vector<double>& x, int p) {
  double s = 0.0;
  for (double xi : x) s += std::pow(std::abs(xi), p);
  return std::pow(s, 1.0 / p);
}

void ToSphere(std::vector<double>& x, int p) {
  const double r = PNorm(x, p);
  for (double& xi : x) xi /= r;
}

double Horner(const std::vector<double>& a, double x) {
  double v = 0.0;
  for (auto it = a.rbegin(); it != a.rend(); ++it) v = v * x + *it;
  return v;
}

}  // namespace

CjVector BestCj(const Polynomial& f, int p, int k, const SdpOptions& options) {
  const int d = f.degree().value_or(0);
  CjVector c;
  c.p = p;
  if (d == 0) return c;
  const auto comps = ComponentsUpTo(f, d);
  c.entries = Entries(comps, d, p, k, options);
  if (p >= 2 && p % 2 == 0 && d % 2 == 0) {
    MergeNie(c.entries[d - 1], NieBound(comps[d], options), f.num_vars(), d, p);
  }
  return c;
}

double LargestNonnegRoot(const std::vector<double>& c) {
  const int d = static_cast<int>(c.size());
  if (d == 0 || !(c.back() > 0.0)) {
    throw std::invalid_argument("LargestNonnegRoot: needs c_d > 0");
  }
  if (d == 1) return 0.0;
  // q(lambda) / lambda = sum_{j<d} c_{j+1} lambda^j, of degree d - 1.
  const int m = d - 1;
  const auto r = [&](double x) { return Horner(c, x); };
  const auto dr = [&](double x) {
    double v = 0.0;
    for (int j = d - 1; j >= 1; --j) v = v * x + j * c[j];
    return v;
  };
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(m, m);
  for (int i = 1; i < m; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < m; ++i) companion(i, m - 1) = -c[i] / c[d - 1];
  const Eigen::VectorXcd eig = Eigen::EigenSolver<Eigen::MatrixXd>(companion, false).eigenvalues();

  double best = 0.0;
  for (const auto& z : eig) {
    if (z.real() <= 0.0 || std::abs(z.imag()) > 1e-8 * std::max(1.0, std::abs(z))) continue;
    double x = z.real();
    const double slope = dr(x);
    if (slope != 0.0) {
      const double polished = x - r(x) / slope;
      if (std::isfinite(polished) && polished > 0.0 && std::abs(r(polished)) <= std::abs(r(x))) {
        x = polished;
      }
    }
    best = std::max(best, x);
  }
  // Clustered roots can come back with imaginary parts above the filter. Any
  // point beyond `best` where q/lambda is not positive hides a larger root;
  // bisect towards the Cauchy bound, where the sign is positive.
  double cauchy = 0.0;
  for (int j = 0; j < m; ++j) cauchy = std::max(cauchy, std::abs(c[j] / c[d - 1]));
  cauchy += 1.0;
  for (const auto& z : eig) {
    double lo = z.real();
    if (lo <= best || r(lo) > 0.0) continue;
    double hi = cauchy;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (r(mid) > 0.0 ? hi : lo) = mid;
    }
    best = std::max(best, lo);
  }
  return best;
}

double MarshallRadius(const Polynomial& f, double c_d) {
  if (!(c_d > 0.0)) throw std::invalid_argument("MarshallRadius: needs c_d > 0");
  const int d = f.degree().value_or(0);
  double s = 0.0;
  for (const auto& [m, a] : f.terms()) {
    if (m.degree() > 0 && m.degree() < d) s += std::abs(a);
  }
  return std::max(1.0, s / c_d);
}

std::vector<OrthantBound> OrthantRadii(const Polynomial& f, double p, double c_d) {
  if (!(c_d > 0.0)) throw std::invalid_argument("OrthantRadii: needs c_d > 0");
  const int n = f.num_vars();
  if (n > 16) throw std::invalid_argument("OrthantRadii: more than 16 variables");
  const int d = f.degree().value_or(0);
  std::vector<OrthantBound> out;
  out.reserve(std::size_t{1} << n);
  for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << n); ++mask) {
    OrthantBound ob;
    ob.tau.resize(n);
    for (int i = 0; i < n; ++i) ob.tau[i] = (mask >> i) & 1u ? -1 : 1;
    ob.c.assign(d, 0.0);
    for (const auto& [m, a] : f.terms()) {
      const int j = m.degree();
      if (j == 0 || j >= d) continue;
      int odd = 0;
      for (int i = 0; i < n; ++i) odd += ob.tau[i] < 0 ? m[i] : 0;
      const double signed_a = odd % 2 == 0 ? a : -a;
      if (signed_a < 0.0) ob.c[j - 1] += signed_a * MonomialSphereMax(m, p);
    }
    ob.c[d - 1] = c_d;
    ob.radius = LargestNonnegRoot(ob.c);
    out.push_back(std::move(ob));
  }
  return out;
}

std::vector<double> SpherePoint(int n, int p, std::uint64_t seed, std::int64_t index) {
  Xoshiro256 rng(SubstreamSeed(seed, static_cast<std::uint64_t>(index)));
  std::vector<double> x(n);
  for (double& xi : x) xi = rng.Normal();
  ToSphere(x, p);
  return x;
}

namespace {

bool SampleBefore(const SphereSample& a, const SphereSample& b) {
  return a.value < b.value || (a.value == b.value && a.index < b.index);
}

// Keeps the `keep` smallest samples of [begin, end) in a max-heap.
void ScanSphere(const CompiledPolynomial& f, int p, std::int64_t begin, std::int64_t end,
                std::size_t keep, std::uint64_t seed, std::vector<SphereSample>& heap) {
  for (std::int64_t i = begin; i < end; ++i) {
    const SphereSample s{f(SpherePoint(f.num_vars(), p, seed, i)), i};
    if (std::isnan(s.value)) continue;
    if (heap.size() < keep) {
      heap.push_back(s);
      std::push_heap(heap.begin(), heap.end(), SampleBefore);
    } else if (keep > 0 && SampleBefore(s, heap.front())) {
      std::pop_heap(heap.begin(), heap.end(), SampleBefore);
      heap.back() = s;
      std::push_heap(heap.begin(), heap.end(), SampleBefore);
    }
  }
}

}  // namespace

std::vector<SphereSample> LowestSphereSamples(const CompiledPolynomial& f, int p,
                                              std::int64_t count, std::size_t keep,
                                              std::uint64_t seed) {
  std::vector<SphereSample> heap;
  ScanSphere(f, p, 0, count, keep, seed, heap);
  std::sort_heap(heap.begin(), heap.end(), SampleBefore);
  return heap;
}

std::vector<SphereSample> LowestSphereSamplesParallel(const CompiledPolynomial& f, int p,
                                                      std::int64_t count, std::size_t keep,
                                                      std::uint64_t seed) {
  constexpr std::int64_t kChunk = 1024;
  const std::int64_t chunks = std::max<std::int64_t>(0, (count + kChunk - 1) / kChunk);
  std::vector<std::vector<SphereSample>> partial(static_cast<std::size_t>(chunks));
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t c = 0; c < chunks; ++c) {
    ScanSphere(f, p, c * kChunk, std::min(count, (c + 1) * kChunk), keep, seed, partial[c]);
  }
  std::vector<SphereSample> all;
  for (const auto& part : partial) all.insert(all.end(), part.begin(), part.end());
  std::sort(all.begin(), all.end(), SampleBefore);
  if (all.size() > keep) all.resize(keep);
  return all;
}

std::optional<std::vector<double>> FindNegativeDirection(const Polynomial& fd, int p,
                                                        const NormBoundOptions& options) {
  const int n = fd.num_vars();
  const CompiledPolynomial value(fd);
  std::vector<CompiledPolynomial> grad;
  for (int i = 0; i < n; ++i) grad.emplace_back(Derivative(fd, i));
  const double tol = 1e-12 * std::max(1.0, OneNorm(fd));

  std::vector<std::pair<double, std::vector<double>>> starts;
  for (int i = 0; i < n; ++i) {
    for (double s : {1.0, -1.0}) {
      std::vector<double> x(n, 0.0);
      x[i] = s;
      starts.emplace_back(value(x), std::move(x));
    }
  }
  for (const SphereSample& sample :
       LowestSphereSamples(value, p, options.witness_samples, options.witness_starts,
                           options.seed)) {
    starts.emplace_back(sample.value, SpherePoint(n, p, options.seed, sample.index));
  }
  const auto by_value = [](const auto& a, const auto& b) { return a.first < b.first; };
  const std::size_t keep = std::min<std::size_t>(starts.size(), options.witness_starts);
  std::partial_sort(starts.begin(), starts.begin() + keep, starts.end(), by_value);

  for (std::size_t s = 0; s < keep; ++s) {
    auto [fx, x] = starts[s];
    double step = 0.1;
    for (int it = 0; it < 500 && step > 1e-14; ++it) {
      if (fx < -tol) break;
      std::vector<double> y = x;
      for (int i = 0; i < n; ++i) y[i] -= step * grad[i](x);
      ToSphere(y, p);
      const double fy = value(y);
      if (fy < fx) {
        x = std::move(y);
        fx = fy;
        step *= 2.0;
      } else {
        step *= 0.5;
      }
    }
    if (fx < -tol) return x;
  }
  return std::nullopt;
}

NormBoundReport ComputeNormBound(const Polynomial& f, int p, int k_max,
                                 const NormBoundOptions& options) {
  const int d = f.degree().value_or(0);
  if (d <= 0 || d % 2 != 0) throw DegreeError(d);
  if (p < 2 || p % 2 != 0) {
    throw std::invalid_argument("ComputeNormBound: p must be even and >= 2");
  }
  const int n = f.num_vars();
  const int k_first = std::max(d, p);
  const int k_last = std::max(k_first, k_max <= 0 ? d + 2 : k_max);

  NormBoundReport report;
  report.num_vars = n;
  report.degree = d;
  report.p = p;
  report.c.p = p;

  const auto comps = ComponentsUpTo(f, d);
  CjEntry top = AlgebraicEntry(comps[d], d, p);
  MergeNie(top, NieBound(comps[d], options.sdp), n, d, p);
  const auto certified = [&] { return top.value > options.certify_tol; };

  if (!certified()) {
    if (auto w = FindNegativeDirection(comps[d], p, options)) {
      report.definite = Definiteness::CertifiedNotPsd;
      report.witness = std::move(w);
    }
  }
  if (!report.witness) {
    for (int k = k_first; k <= k_last && !certified(); k += 2) {
      report.certify_level = k;
      MergeSphereSos(top, SphereMinBound(comps[d], p, k, options.sdp));
    }
  }
  if (!certified()) {
    for (int j = 1; j < d; ++j) report.c.entries.push_back(AlgebraicEntry(comps[j], j, p));
    report.c.entries.push_back(top);
    return report;
  }

  report.definite = Definiteness::CertifiedPositive;
  report.level = k_last;
  report.c.entries = Entries(comps, d - 1, p, k_last, options.sdp);
  if (report.certify_level != k_last) {
    MergeSphereSos(top, SphereMinBound(comps[d], p, k_last, options.sdp));
  }
  report.c.entries.push_back(top);

  const double c_d = top.value;
  report.radius = LargestNonnegRoot(report.c.values());
  report.box_radius = static_cast<std::int64_t>(std::floor(*report.radius));
  if (p == 2) report.marshall_radius = MarshallRadius(f, c_d);
  if (n <= options.orthant_max_vars) report.orthants = OrthantRadii(f, p, c_d);
  return report;
}

namespace {

nlohmann::json OptionalJson(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json ToJson(const CjVector& c) {
  nlohmann::json entries = nlohmann::json::array();
  for (const CjEntry& e : c.entries) {
    entries.push_back({{"j", e.degree},
                       {"value", e.value},
                       {"source", ToString(e.source)},
                       {"coefficient_norm", e.coefficient_norm},
                       {"monomial_refined", e.monomial_refined},
                       {"sphere_sos", OptionalJson(e.sphere_sos)},
                       {"nie", OptionalJson(e.nie)}});
  }
  return {{"p", c.p}, {"entries", entries}};
}

nlohmann::json ToJson(const NormBoundReport& r) {
  nlohmann::json orthants = nlohmann::json::array();
  for (const OrthantBound& o : r.orthants) {
    orthants.push_back({{"tau", o.tau}, {"c", o.c}, {"R", o.radius}});
  }
  nlohmann::json j = {{"n", r.num_vars},
                      {"d", r.degree},
                      {"p", r.p},
                      {"definite", ToString(r.definite)},
                      {"certify_level", r.certify_level},
                      {"level", r.level},
                      {"c", ToJson(r.c)},
                      {"R", OptionalJson(r.radius)},
                      {"R_lit", OptionalJson(r.marshall_radius)},
                      {"orthants", orthants}};
  j["box_radius"] = r.box_radius ? nlohmann::json(*r.box_radius) : nlohmann::json(nullptr);
  j["witness"] = r.witness ? nlohmann::json(*r.witness) : nlohmann::json(nullptr);
  return j;
}

}  // namespace polymin
