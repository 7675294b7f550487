#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qfn/common.hpp"

namespace qfn {

using cplx = std::complex<double>;

constexpr int kCoordinator = -1;
constexpr int kDefaultMaxQubits = 24;

struct Register {
  std::string name;
  int offset = 0;  // global index of the register's least significant qubit
  int width = 0;
  int owner = kCoordinator;
};

// Registers occupy contiguous global qubit ranges. Within a register, bit 1 (the most
// significant) is global qubit offset+width-1.
class RegisterLayout {
 public:
  int add(const std::string& name, int width, int owner = kCoordinator);
  bool has(const std::string& name) const;
  const Register& get(const std::string& name) const;
  const std::vector<Register>& registers() const { return regs_; }
  int total_qubits() const { return total_; }
  // global qubit of register bit k (1-based, 1 = most significant)
  int qubit(const std::string& name, int k) const;
  std::string describe() const;

 private:
  std::vector<Register> regs_;
  int total_ = 0;
};

// Control condition: (index & mask) == value.
struct Controls {
  std::uint64_t mask = 0;
  std::uint64_t value = 0;
  Controls with(int qubit, bool polarity = true) const;
  bool overlaps(std::uint64_t support) const { return (mask & support) != 0; }
  bool match(std::uint64_t i) const { return (i & mask) == value; }
};

class QuantumState {
 public:
  explicit QuantumState(RegisterLayout layout, int max_qubits = kDefaultMaxQubits);

  const RegisterLayout& layout() const { return layout_; }
  int num_qubits() const { return layout_.total_qubits(); }
  std::vector<cplx>& amplitudes() { return amp_; }
  const std::vector<cplx>& amplitudes() const { return amp_; }
  std::uint64_t reg_value(std::uint64_t index, const std::string& reg) const;
  std::uint64_t reg_mask(const std::string& reg) const;

  void apply_h(int qubit, const Controls& c = {});
  void apply_x(int qubit, const Controls& c = {});
  void apply_hadamard_all(const std::string& reg, const Controls& c = {});
  void apply_x_all(const std::string& reg, const Controls& c = {});
  // sign flip on basis states whose register value satisfies pred
  void apply_phase_oracle(const std::string& reg, const std::function<bool(std::uint64_t)>& pred,
                          const Controls& c = {});
  // sign flip on basis states (full index) satisfying pred
  void apply_sign(const std::function<bool(std::uint64_t)>& pred, const Controls& c = {});
  // 2|0><0| - I over the union of the listed registers
  void reflect_zero(const std::vector<std::string>& regs, const Controls& c = {});
  // involutive basis permutation; perm(perm(i)) == i is required
  void apply_involution(const std::function<std::uint64_t(std::uint64_t)>& perm, const Controls& c = {});
  void apply_qft(const std::string& reg, const Controls& c = {});
  void apply_qft_inverse(const std::string& reg, const Controls& c = {});
  // inner operation restricted to the control block
  void apply_controlled(const Controls& c, const std::function<void(QuantumState&, const Controls&)>& inner);

  double norm() const;
  std::vector<double> probabilities(const std::string& reg) const;
  double project_probability(const std::string& reg, std::uint64_t value) const;
  // amplitude of the full basis state `index`
  cplx amplitude(std::uint64_t index) const { return amp_.at(index); }
  std::uint64_t most_probable(const std::string& reg) const;
  // samples from the marginal and collapses
  std::uint64_t measure(const std::string& reg, std::uint64_t seed);
  std::string dump(double eps = 1e-12) const;

 private:
  void qft_impl(const std::string& reg, const Controls& c, double sign);
  RegisterLayout layout_;
  std::vector<cplx> amp_;
};

// A reversible operation sequence. Each step is applied forward or as its adjoint.
using OpFn = std::function<void(QuantumState&, const Controls&, bool adjoint)>;

class Circuit {
 public:
  void add(OpFn op) { ops_.push_back(std::move(op)); }
  void append(const Circuit& other);
  void apply(QuantumState& s, const Controls& c = {}, bool adjoint = false) const;
  std::size_t size() const { return ops_.size(); }

 private:
  std::vector<OpFn> ops_;
};

}  // namespace qfn
