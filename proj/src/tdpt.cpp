#include "gplvc/tdpt.hpp"

#include <cmath>

namespace gplvc {

namespace {

// Generalized Laguerre L_m^(k)(x) by the standard three-term recurrence.
double laguerre(int m, int k, double x) {
  if (m == 0) return 1.0;
  double lm1 = 1.0, l = 1.0 + k - x;
  for (int i = 1; i < m; ++i) {
    const double next = ((2.0 * i + 1.0 + k - x) * l - (i + k) * lm1) / (i + 1.0);
    lm1 = l;
    l = next;
  }
  return l;
}

double falling_sqrt_ratio(int lo, int hi) {
  // sqrt(lo! / hi!) for hi >= lo.
  double prod = 1.0;
  for (int i = lo + 1; i <= hi; ++i) prod *= i;
  return 1.0 / std::sqrt(prod);
}

double envelope(double freq, double t) {
  if (std::abs(freq) < 1e-10) return t * t;
  const double s = std::sin(0.5 * freq * t) / (0.5 * freq);
  return s * s;
}

void require_isotropic_symmetric(const SubsystemParameters& p, bool allow_delta) {
  if (std::abs(p.Omega_X - p.Omega_Y) > 1e-12 * p.Omega_X)
    throw std::invalid_argument("tdpt channels assume isotropic wells (Omega_X = Omega_Y)");
  if (std::abs(p.Y0) > 0) throw std::invalid_argument("tdpt channels assume Y0 = 0");
  if (!allow_delta && p.Delta != 0)
    throw std::invalid_argument("this channel assumes Delta = 0");
}

}  // namespace

double fc_overlap(int n, int m, double displacement, double Omega) {
  if (n < 0 || m < 0) throw std::invalid_argument("fc_overlap: quantum numbers must be >= 0");
  const double alpha = displacement * std::sqrt(0.5 * Omega);
  const double gauss = std::exp(-0.5 * alpha * alpha);
  if (n >= m)
    return falling_sqrt_ratio(m, n) * std::pow(alpha, n - m) * gauss *
           laguerre(m, n - m, alpha * alpha);
  return falling_sqrt_ratio(n, m) * std::pow(-alpha, m - n) * gauss *
         laguerre(n, m - n, alpha * alpha);
}

double displaced_position_element(int n, double X0, double Omega) {
  const double d = -2.0 * X0;  // donor center relative to the acceptor frame
  const double s_n = fc_overlap(n, 0, d, Omega);
  const double s_np = fc_overlap(n + 1, 0, d, Omega);
  const double s_nm = n > 0 ? fc_overlap(n - 1, 0, d, Omega) : 0.0;
  return X0 * s_n + (std::sqrt(n + 1.0) * s_np + std::sqrt(double(n)) * s_nm) /
                        std::sqrt(2.0 * Omega);
}

Vec ChannelEstimate::evaluate(const Vec& times) const {
  Vec out(times.size());
  for (int i = 0; i < times.size(); ++i) out[i] = population(times[i]);
  return out;
}

ChannelEstimate channel_1a(const SubsystemParameters& p) {
  require_isotropic_symmetric(p, /*allow_delta=*/true);
  const double Omega = p.Omega_X;
  const double y01 = 1.0 / std::sqrt(2.0 * Omega);
  const double fc00 = fc_overlap(0, 0, -2.0 * p.X0, Omega);
  ChannelEstimate ch;
  ch.channel = "1a";
  ch.prefactor = std::pow(p.C_Y * y01 * fc00, 2);
  ch.envelope_frequency = Omega - p.Delta;
  ch.resonant = std::abs(ch.envelope_frequency) < 1e-10;
  const double pref = ch.prefactor, freq = ch.envelope_frequency;
  ch.population = [pref, freq](double t) { return pref * envelope(freq, t); };
  return ch;
}

ChannelEstimate channel_1b(const SubsystemParameters& p, int n_max) {
  require_isotropic_symmetric(p, /*allow_delta=*/false);
  const double Omega = p.Omega_X;
  std::vector<double> fc2(n_max + 1);
  for (int n = 0; n <= n_max; ++n) fc2[n] = std::pow(fc_overlap(n, 0, -2.0 * p.X0, Omega), 2);
  ChannelEstimate ch;
  ch.channel = "1b";
  ch.prefactor = p.Delta12 * p.Delta12 * fc2[0];  // resonant term scale
  ch.envelope_frequency = 0.0;
  ch.resonant = p.Delta12 != 0.0;
  const double d2 = p.Delta12 * p.Delta12;
  ch.population = [d2, fc2, Omega](double t) {
    double sum = 0;
    for (size_t n = 0; n < fc2.size(); ++n) sum += fc2[n] * envelope(n * Omega, t);
    return d2 * sum;
  };
  return ch;
}

ChannelEstimate channel_1c(const SubsystemParameters& p, int n_max) {
  require_isotropic_symmetric(p, /*allow_delta=*/false);
  const double Omega = p.Omega_X;
  std::vector<double> el2(n_max + 1, 0.0);
  for (int n = 1; n <= n_max; ++n)
    el2[n] = std::pow(p.C_X * displaced_position_element(n, p.X0, Omega), 2);
  ChannelEstimate ch;
  ch.channel = "1c";
  double pref = 0;
  for (double v : el2) pref += v;
  ch.prefactor = pref;
  ch.envelope_frequency = Omega;
  ch.resonant = false;  // the n = 0 element vanishes by the equidistant minima
  ch.population = [el2, Omega](double t) {
    double sum = 0;
    for (size_t n = 1; n < el2.size(); ++n) sum += el2[n] * envelope(n * Omega, t);
    return sum;
  };
  return ch;
}

ChannelEstimate channel_bath_2nd(const SubsystemParameters& p, const BathParameters& bath,
                                 double t_max, int n_time_steps) {
  require_isotropic_symmetric(p, /*allow_delta=*/false);
  // X couplings do not feed the donor-acceptor transfer at this order; only
  // the Y components enter the pathway sum.
  const double Omega = p.Omega_X;
  const double y01 = 1.0 / std::sqrt(2.0 * Omega);
  const double fc00 = fc_overlap(0, 0, -2.0 * p.X0, Omega);
  const double m1 = p.C_Y * y01 * fc00;  // electronic transfer leg

  const int N = std::max(16, n_time_steps);
  const double dt = t_max / N;
  const int J = bath.n_modes();
  // Cumulative double integral per mode, both pathway orderings, T = 0.
  Vec total = Vec::Zero(N + 1);
  double pref_sum = 0;
  for (int j = 0; j < J; ++j) {
    const double lam = bath.lambda_Y.size() > j ? bath.lambda_Y[j] : 0.0;
    if (lam == 0.0) continue;
    const double mq = lam * y01 / std::sqrt(2.0 * bath.Omega[j]);
    pref_sum += std::pow(m1 * mq, 2);
    const double w_fast = Omega + bath.Omega[j];
    cplx inner1(0, 0), inner2(0, 0);  // cumulative inner integrals
    cplx a1(0, 0), a2(0, 0);
    cplx prev_f1(1, 0), prev_f2(1, 0);  // integrands at tau = 0
    cplx prev_o1(0, 0), prev_o2(0, 0);  // outer integrands
    for (int i = 1; i <= N; ++i) {
      const double tau = i * dt;
      const cplx f1(std::cos(w_fast * tau), -std::sin(w_fast * tau));
      const cplx f2(std::cos(Omega * tau), -std::sin(Omega * tau));
      inner1 += 0.5 * dt * (prev_f1 + f1);
      inner2 += 0.5 * dt * (prev_f2 + f2);
      prev_f1 = f1;
      prev_f2 = f2;
      const cplx o1 = f2 * inner1;  // exp(-i Omega tau) * int exp(-i (Omega+W_j) tau')
      const cplx o2 = f1 * inner2;  // exp(-i (Omega+W_j) tau) * int exp(-i Omega tau')
      a1 += 0.5 * dt * (prev_o1 + o1);
      a2 += 0.5 * dt * (prev_o2 + o2);
      prev_o1 = o1;
      prev_o2 = o2;
      total[i] += std::norm(m1 * mq * (a1 + a2));
    }
  }
  ChannelEstimate ch;
  ch.channel = "bath-2nd";
  ch.prefactor = pref_sum;
  ch.envelope_frequency = Omega;  // efficient transfer needs Omega_j near Omega
  ch.resonant = false;
  const double tmax = t_max;
  ch.population = [total, tmax, N](double t) {
    if (t <= 0) return 0.0;
    const double u = std::min(t, tmax) / tmax * N;
    const int i = std::min(N - 1, (int)u);
    const double frac = u - i;
    return total[i] * (1 - frac) + total[i + 1] * frac;
  };
  return ch;
}

}  // namespace gplvc
