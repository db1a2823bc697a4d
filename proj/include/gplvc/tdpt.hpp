#pragma once

#include <functional>

#include "gplvc/model.hpp"

namespace gplvc {

// Overlap <n at 0 | m at d> of equal-frequency displaced oscillator
// eigenstates (associated-Laguerre closed form).
double fc_overlap(int n, int m, double displacement, double Omega);

// <n at +X0 | X | 0 at -X0> for frequency Omega wells at +-X0.
double displaced_position_element(int n, double X0, double Omega);

// First- and second-order perturbative donor-to-acceptor transfer channels
// for the isotropic subsystem. Comparative diagnostics: the bath channel in
// particular carries an unspecified overall normalization and is only used
// for relative magnitudes and resonance trends.
struct ChannelEstimate {
  std::string channel;                      // "1a", "1b", "1c", "bath-2nd"
  double prefactor = 0.0;                   // squared matrix element scale
  double envelope_frequency = 0.0;          // 0 marks a resonant t^2 term
  bool resonant = false;
  std::function<double(double)> population;  // P(t), P(0) = 0, P >= 0

  Vec evaluate(const Vec& times) const;
};

// Constant-coupling channel through <01|C_Y Y sigma_x|00>; resonant at
// Delta = Omega.
ChannelEstimate channel_1a(const SubsystemParameters& p);

// Delta12 channel; the n_X = 0 term is resonant (grows as t^2).
ChannelEstimate channel_1b(const SubsystemParameters& p, int n_max = 30);

// Tuning-direction admixture channel (C_X != 0); no resonant term exists.
ChannelEstimate channel_1c(const SubsystemParameters& p, int n_max = 40);

// Second-order bath-assisted channel for a Y-coupled bath: numerical double
// time integral of the two transfer pathways, summed over bath modes.
ChannelEstimate channel_bath_2nd(const SubsystemParameters& p, const BathParameters& bath,
                                 double t_max, int n_time_steps = 4000);

}  // namespace gplvc
