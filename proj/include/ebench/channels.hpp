#pragma once
// Completely positive maps (possibly trace-decreasing) on a single system,
// the test zoo, and Choi-Jamiolkowski states.

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "ebench/core.hpp"
#include "ebench/fock.hpp"

namespace ebench::channels {

struct KrausList {
  std::vector<CMatrix> ops;  // each output_dim x input_dim
};

/// E(rho) = sum_i w_i <m_i|rho|m_i> |s_i><s_i|.
/// povm columns m_i may be unnormalized; prep columns s_i are normalized.
struct MeasurePrepare {
  RVector weights;
  CMatrix povm;  // input_dim x N
  CMatrix prep;  // output_dim x N
};

/// Unnormalized Choi matrix sum_ij E(|i><j|) (x) |i><j| on output (x) input.
struct ChoiMatrix {
  CMatrix choi;
};

class Channel {
 public:
  using Form = std::variant<KrausList, MeasurePrepare, ChoiMatrix>;

  Channel(std::string id, fock::Space input, fock::Space output, Form form, double scale = 1.0);

  const std::string& id() const { return id_; }
  const fock::Space& input() const { return input_; }
  const fock::Space& output() const { return output_; }
  const Form& form() const { return form_; }
  double scale() const { return scale_; }

  /// Same map with the global success scaling multiplied by q in (0, 1].
  Channel scaled(double q, std::string id) const;

  /// Unnormalized output. Rejects dimension mismatch and rho with an
  /// eigenvalue below -1e-8.
  fock::Operator apply(const fock::Operator& rho) const;

  /// Linear action on an arbitrary input_dim x input_dim matrix.
  CMatrix apply_matrix(const CMatrix& x) const;

  /// Heisenberg picture: tr[A E(rho)] = tr[adjoint_apply(A) rho].
  CMatrix adjoint_apply(const CMatrix& observable) const;

  /// sum_k K^dagger K (scaled); the identity for trace-preserving maps.
  const CMatrix& effect() const { return effect_; }

  /// Per column k of `kets`: tr E(|k><k|).
  RVector output_traces(const CMatrix& kets) const;
  /// Per column k: tr[A E(|k><k|)].
  CVector observable_response(const CMatrix& observable, const CMatrix& kets) const;
  /// Per column c: <t_c| E(|k_c><k_c|) |t_c>.
  RVector target_response(const CMatrix& kets, const CMatrix& targets) const;

 private:
  std::string id_;
  fock::Space input_;
  fock::Space output_;
  Form form_;
  double scale_;
  CMatrix effect_;
};

struct ChannelSpec {
  enum class Kind {
    identity,
    pure_loss,
    heterodyne_mp,
    qudit_depolarizing,
    z_measure_prepare,
    x_measure_prepare,
    rank_k_random,
    kraus_explicit,
    filter_scale,
  };

  Kind kind = Kind::identity;
  double tau = 1.0;   // pure_loss transmissivity
  double gain = 1.0;  // heterodyne re-preparation gain
  int radial_nodes = 0;   // heterodyne POVM grid, 0 = derived from the cutoff
  int angular_nodes = 0;
  double p = 0.0;     // depolarizing probability
  int rank = 1;       // rank_k_random
  std::uint64_t seed = 1;
  std::vector<CMatrix> kraus;  // kraus_explicit
  bool allow_non_cp = false;
  double q = 1.0;     // filter_scale
  std::vector<ChannelSpec> inner;  // filter_scale: exactly one element

  bool operator==(const ChannelSpec& other) const;
};

ChannelSpec identity_spec();
ChannelSpec pure_loss_spec(double tau);
ChannelSpec heterodyne_spec(double gain, int radial_nodes = 0, int angular_nodes = 0);
ChannelSpec depolarizing_spec(double p);
ChannelSpec z_measure_prepare_spec();
ChannelSpec x_measure_prepare_spec();
ChannelSpec rank_k_random_spec(int k, std::uint64_t seed);
ChannelSpec kraus_explicit_spec(std::vector<CMatrix> ops, bool allow_non_cp = false);
ChannelSpec filter_scale_spec(double q, ChannelSpec inner);

std::string describe(const ChannelSpec& spec);
const char* kind_name(ChannelSpec::Kind kind);

/// Builds the channel on `space` (input = output). Parameters are range
/// checked; kraus_explicit sets with sum K^dagger K > I are rejected unless
/// allow_non_cp is set.
Channel build_channel(const ChannelSpec& spec, const fock::Space& space);

/// Heterodyne POVM grid used when the ChannelSpec leaves the node counts at 0.
struct HeterodyneGrid {
  int radial;
  int angular;
};
HeterodyneGrid default_heterodyne_grid(int cutoff);

struct Completeness {
  bool trace_preserving = false;
  double defect = 0.0;  // spectral norm of effect - I
};
Completeness kraus_completeness(const Channel& channel);

struct ChoiState {
  fock::Operator J;  // (output A) (x) reference B, unnormalized
  double success_probability = 0.0;
  std::string source;
};

/// J = (E (x) I)(psi) with E acting on the first tensor factor of psi.
ChoiState choi_state(const Channel& channel, const fock::Operator& psi);
ChoiState choi_state(const Channel& channel, const fock::StateVector& psi);

/// The channel's own unnormalized Choi matrix (reference = |I>> on a copy of
/// the input space tagged "ref").
CMatrix choi_matrix(const Channel& channel);

}  // namespace ebench::channels
