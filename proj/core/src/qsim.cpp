#include "qfn/qsim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace qfn {

int RegisterLayout::add(const std::string& name, int width, int owner) {
  if (width < 0) throw ConfigError("negative register width for " + name);
  if (has(name)) throw ConfigError("duplicate register " + name);
  regs_.push_back({name, total_, width, owner});
  total_ += width;
  return regs_.back().offset;
}

bool RegisterLayout::has(const std::string& name) const {
  return std::any_of(regs_.begin(), regs_.end(), [&](const Register& r) { return r.name == name; });
}

const Register& RegisterLayout::get(const std::string& name) const {
  for (const Register& r : regs_)
    if (r.name == name) return r;
  throw ConfigError("unknown register " + name);
}

int RegisterLayout::qubit(const std::string& name, int k) const {
  const Register& r = get(name);
  if (k < 1 || k > r.width) throw ConfigError("register bit out of range in " + name);
  return r.offset + r.width - k;
}

std::string RegisterLayout::describe() const {
  std::ostringstream os;
  for (const Register& r : regs_)
    os << r.name << "[" << r.width << "]@" << (r.owner == kCoordinator ? std::string("c") : "w" + std::to_string(r.owner))
       << " ";
  os << "total=" << total_;
  return os.str();
}

Controls Controls::with(int qubit, bool polarity) const {
  Controls c = *this;
  std::uint64_t b = std::uint64_t{1} << qubit;
  c.mask |= b;
  if (polarity)
    c.value |= b;
  else
    c.value &= ~b;
  return c;
}

QuantumState::QuantumState(RegisterLayout layout, int max_qubits) : layout_(std::move(layout)) {
  if (layout_.total_qubits() > max_qubits)
    throw ResourceOverflow("register layout needs " + std::to_string(layout_.total_qubits()) +
                           " qubits, engine cap is " + std::to_string(max_qubits) + ": " + layout_.describe());
  amp_.assign(std::size_t{1} << layout_.total_qubits(), cplx{0.0, 0.0});
  amp_[0] = 1.0;
}

std::uint64_t QuantumState::reg_value(std::uint64_t index, const std::string& reg) const {
  const Register& r = layout_.get(reg);
  return (index >> r.offset) & ((std::uint64_t{1} << r.width) - 1);
}

std::uint64_t QuantumState::reg_mask(const std::string& reg) const {
  const Register& r = layout_.get(reg);
  return ((std::uint64_t{1} << r.width) - 1) << r.offset;
}

void QuantumState::apply_h(int qubit, const Controls& c) {
  const std::uint64_t b = std::uint64_t{1} << qubit;
  if (c.overlaps(b)) throw ConfigError("control overlaps hadamard target");
  const double s = std::numbers::sqrt2 / 2;
  for (std::uint64_t i = 0; i < amp_.size(); ++i) {
    if ((i & b) || !c.match(i)) continue;
    cplx a0 = amp_[i], a1 = amp_[i | b];
    amp_[i] = s * (a0 + a1);
    amp_[i | b] = s * (a0 - a1);
  }
}

void QuantumState::apply_x(int qubit, const Controls& c) {
  const std::uint64_t b = std::uint64_t{1} << qubit;
  if (c.overlaps(b)) throw ConfigError("control overlaps X target");
  for (std::uint64_t i = 0; i < amp_.size(); ++i)
    if (!(i & b) && c.match(i)) std::swap(amp_[i], amp_[i | b]);
}

void QuantumState::apply_hadamard_all(const std::string& reg, const Controls& c) {
  const Register& r = layout_.get(reg);
  for (int q = r.offset; q < r.offset + r.width; ++q) apply_h(q, c);
}

void QuantumState::apply_x_all(const std::string& reg, const Controls& c) {
  const Register& r = layout_.get(reg);
  for (int q = r.offset; q < r.offset + r.width; ++q) apply_x(q, c);
}

void QuantumState::apply_phase_oracle(const std::string& reg, const std::function<bool(std::uint64_t)>& pred,
                                      const Controls& c) {
  const Register& r = layout_.get(reg);
  const std::uint64_t m = (std::uint64_t{1} << r.width) - 1;
  for (std::uint64_t i = 0; i < amp_.size(); ++i)
    if (c.match(i) && pred((i >> r.offset) & m)) amp_[i] = -amp_[i];
}

void QuantumState::apply_sign(const std::function<bool(std::uint64_t)>& pred, const Controls& c) {
  for (std::uint64_t i = 0; i < amp_.size(); ++i)
    if (c.match(i) && pred(i)) amp_[i] = -amp_[i];
}

void QuantumState::reflect_zero(const std::vector<std::string>& regs, const Controls& c) {
  std::uint64_t m = 0;
  for (const auto& r : regs) m |= reg_mask(r);
  if (c.overlaps(m)) throw ConfigError("control overlaps reflection support");
  for (std::uint64_t i = 0; i < amp_.size(); ++i)
    if (c.match(i) && (i & m) != 0) amp_[i] = -amp_[i];
}

void QuantumState::apply_involution(const std::function<std::uint64_t(std::uint64_t)>& perm, const Controls& c) {
  for (std::uint64_t i = 0; i < amp_.size(); ++i) {
    if (!c.match(i)) continue;
    std::uint64_t j = perm(i);
    if (j > i) std::swap(amp_[i], amp_[j]);
  }
}

void QuantumState::qft_impl(const std::string& reg, const Controls& c, double sign) {
  const Register& r = layout_.get(reg);
  if (r.width == 0) return;
  const std::uint64_t dim = std::uint64_t{1} << r.width;
  const std::uint64_t rm = (dim - 1) << r.offset;
  if (c.overlaps(rm)) throw ConfigError("control overlaps QFT register");
  std::vector<cplx> w(dim);
  for (std::uint64_t k = 0; k < dim; ++k)
    w[k] = std::polar(1.0, sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(dim));
  const double norm = 1.0 / std::sqrt(static_cast<double>(dim));
  std::vector<cplx> in(dim), out(dim);
  for (std::uint64_t base = 0; base < amp_.size(); ++base) {
    if ((base & rm) || !c.match(base)) continue;
    for (std::uint64_t j = 0; j < dim; ++j) in[j] = amp_[base | (j << r.offset)];
    for (std::uint64_t k = 0; k < dim; ++k) {
      cplx s = 0;
      for (std::uint64_t j = 0; j < dim; ++j) s += in[j] * w[(j * k) & (dim - 1)];
      out[k] = s * norm;
    }
    for (std::uint64_t k = 0; k < dim; ++k) amp_[base | (k << r.offset)] = out[k];
  }
}

void QuantumState::apply_qft(const std::string& reg, const Controls& c) { qft_impl(reg, c, 1.0); }
void QuantumState::apply_qft_inverse(const std::string& reg, const Controls& c) { qft_impl(reg, c, -1.0); }

void QuantumState::apply_controlled(const Controls& c,
                                    const std::function<void(QuantumState&, const Controls&)>& inner) {
  inner(*this, c);
}

double QuantumState::norm() const {
  double s = 0;
  for (const cplx& a : amp_) s += std::norm(a);
  return std::sqrt(s);
}

std::vector<double> QuantumState::probabilities(const std::string& reg) const {
  const Register& r = layout_.get(reg);
  std::vector<double> p(std::size_t{1} << r.width, 0.0);
  const std::uint64_t m = p.size() - 1;
  for (std::uint64_t i = 0; i < amp_.size(); ++i) p[(i >> r.offset) & m] += std::norm(amp_[i]);
  return p;
}

double QuantumState::project_probability(const std::string& reg, std::uint64_t value) const {
  return probabilities(reg).at(value);
}

std::uint64_t QuantumState::most_probable(const std::string& reg) const {
  auto p = probabilities(reg);
  return static_cast<std::uint64_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

std::uint64_t QuantumState::measure(const std::string& reg, std::uint64_t seed) {
  auto p = probabilities(reg);
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::uint64_t> d(p.begin(), p.end());
  std::uint64_t v = d(rng);
  if (p[v] <= 0) throw ConfigError("zero-probability measurement outcome");
  const Register& r = layout_.get(reg);
  const std::uint64_t m = (std::uint64_t{1} << r.width) - 1;
  const double scale = 1.0 / std::sqrt(p[v]);
  for (std::uint64_t i = 0; i < amp_.size(); ++i)
    amp_[i] = ((i >> r.offset) & m) == v ? amp_[i] * scale : cplx{0, 0};
  return v;
}

std::string QuantumState::dump(double eps) const {
  std::ostringstream os;
  os.precision(12);
  for (std::uint64_t i = 0; i < amp_.size(); ++i) {
    if (std::abs(amp_[i]) <= eps) continue;
    os << "|";
    bool first = true;
    for (const Register& r : layout_.registers()) {
      if (r.width == 0) continue;
      if (!first) os << " ";
      first = false;
      os << r.name << "=";
      for (int k = r.width - 1; k >= 0; --k) os << ((i >> (r.offset + k)) & 1);
    }
    os << "> " << amp_[i].real() << (amp_[i].imag() < 0 ? "" : "+") << amp_[i].imag() << "i\n";
  }
  return os.str();
}

void Circuit::append(const Circuit& other) {
  for (const auto& op : other.ops_) ops_.push_back(op);
}

void Circuit::apply(QuantumState& s, const Controls& c, bool adjoint) const {
  if (!adjoint) {
    for (const auto& op : ops_) op(s, c, false);
  } else {
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)(s, c, true);
  }
}

}  // namespace qfn
