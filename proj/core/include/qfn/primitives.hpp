#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qfn/qsim.hpp"

namespace qfn {

enum class TPolicy { reject, clamp };
// standard: t = ceil(-log2(delta c)/2 - 1/2); corrected: t = ceil(-log2(delta c)/2), which makes the
// all-zero estimate probability at most delta for every p >= c
enum class TRule { standard, corrected };

// t_max from QFN_TMAX if set, otherwise 8
int default_t_max();

struct PrecisionParams {
  int n_p = 1;
  double delta = 0.25;
  int t_max = default_t_max();
  TPolicy t_policy = TPolicy::reject;
  TRule t_rule = TRule::standard;
  void validate() const;
};

double z_dec(const std::vector<int>& bits);
// value of an n-bit register read with bit 1 as the most significant
double z_dec(std::uint64_t value, int nbits);
// index of the best n_p-bit lower approximation of v in [0,1]
std::uint64_t floor_key(double v, int n_p);
std::vector<int> key_bits(std::uint64_t key, int n_p);
std::string key_string(std::uint64_t key, int n_p);

TPolicy t_policy_from_string(const std::string& s);
TRule t_rule_from_string(const std::string& s);
std::string to_string(TPolicy p);
std::string to_string(TRule r);

// t(c, delta) = ceil(-log2(delta c)/2 - 1/2), clamped below at 0 (standard rule)
int t_count(double c, double delta, TRule rule = TRule::standard);
// t_count checked against params.t_max; rejects (ResourceOverflow) or clamps per policy
int t_checked(double c, const PrecisionParams& params, const std::string& where, bool* clamped = nullptr);

// threshold key for phase test k (1-based) given the already-fixed prefix bits of the value register
std::uint64_t threshold_key(std::uint64_t prefix_value, int k, int n_p);

// ---- gate-level kernels ----

// U_AA = U_ini (2|0><0| - I)_target U_ini^dag (U_{Z>=z}); applied right to left
Circuit build_uaa(const Circuit& state_prep, const std::vector<std::string>& target_regs,
                  std::function<void(QuantumState&, const Controls&)> marking);

struct PhaseTestRegs {
  std::string est;
  std::vector<std::string> target;
  int out_qubit = 0;
  int aux_qubit = 0;
};

struct PhaseTestCount {
  std::uint64_t u_o = 0;
  std::uint64_t u_pe0 = 0;
};

// Six-step approximately reversible phase test. Counters (if given) tally operator applications.
Circuit phase_test_circuit(const Circuit& u_pe0, const Circuit& u_o, const PhaseTestRegs& regs,
                           PhaseTestCount* count = nullptr);

struct UMaxSpec {
  int n_bits = 0;             // width of q_sr
  int n_p = 1;
  int t = 0;
  std::string st = "q_st";    // estimation register
  std::string sr = "q_sr";    // search register
  std::string p = "q_p";      // value register
  std::string aux = "q_aux";  // one error-mitigation qubit per value bit
  std::string ctx;            // optional register the objective depends on (empty = none)
  // objective F(ctx value, search value) in [0,1]
  std::function<double(std::uint64_t, std::uint64_t)> f;
};

// Allocates the U_max registers (st, sr, p, aux) on `layout` with the given owner.
void add_umax_registers(RegisterLayout& layout, const UMaxSpec& spec, int owner = kCoordinator);

// Gate-level U_max with Hadamard state preparation; `queries` counts U_F applications.
Circuit u_max_circuit(const UMaxSpec& spec, std::uint64_t* queries = nullptr);

// Default state preparation: Hadamards on the register, p_min = 2^-N.
Circuit default_state_prep(const std::string& reg, std::uint64_t* queries = nullptr);
inline double default_p_min(int n_bits) { return 1.0 / static_cast<double>(pow2(n_bits)); }

// ---- exact compact engine ----
//
// Bit-by-bit threshold search driven by a state preparation whose output, restricted to the
// value it encodes, has class weights w[key] (key = floor_key of the encoded value). The
// target register is represented in the basis of normalized class projections, which the
// search operators leave invariant. Exact for any state preparation with these weights.

struct CompactHooks {
  std::function<void(bool adjoint)> on_prep;      // each U_ini / U_F application
  std::function<void()> on_reflection;            // each 2|0><0|-I on the target
  std::function<void(int k)> on_test_begin;       // before forward QPE of test k
  std::function<void(int k)> on_test_end;         // after inverse QPE of test k
};

struct CompactResult {
  int n_p = 0;
  int t = 0;
  std::vector<double> weights;        // per key
  std::uint64_t correct_key = 0;      // largest key with positive weight
  std::vector<double> marginal;       // final q_p distribution (all sectors kept)
  std::vector<double> clean_mass;     // per key, mass on est=0, target=|0>, aux=0
  double dropped_mass = 0.0;          // aux sectors discarded when keep_aux is false
  std::vector<double> p_z;            // p_z of each test along the correct prefix
  std::uint64_t prep_calls = 0;
  std::uint64_t uaa_calls = 0;
  std::uint64_t reflections = 0;
  double max_norm_error = 0.0;
  double clean_correct() const { return clean_mass.at(correct_key); }
};

struct CompactOptions {
  bool keep_aux = true;
  CompactHooks hooks;
};

CompactResult compact_max(const std::vector<double>& weights, int n_p, int t, const CompactOptions& opt = {});

// Class weights of a uniform superposition over a table of values.
std::vector<double> uniform_weights(const std::vector<double>& values, int n_p);

}  // namespace qfn
