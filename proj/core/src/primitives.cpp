#include "qfn/primitives.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>

namespace qfn {

int default_t_max() {
  if (const char* s = std::getenv("QFN_TMAX")) {
    char* end = nullptr;
    long v = std::strtol(s, &end, 10);
    if (end != s && *end == '\0' && v >= 0 && v <= 30) return static_cast<int>(v);
  }
  return 8;
}

void PrecisionParams::validate() const {
  if (n_p < 1) throw ConfigError("N_p must be at least 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
  if (t_max < 0) throw ConfigError("t_max must be nonnegative");
}

double z_dec(const std::vector<int>& bits) {
  double s = 0.0, w = 0.5;
  for (int b : bits) {
    s += b ? w : 0.0;
    w *= 0.5;
  }
  return s;
}

double z_dec(std::uint64_t value, int nbits) { return std::ldexp(static_cast<double>(value), -nbits); }

std::uint64_t floor_key(double v, int n_p) {
  const double top = static_cast<double>(pow2(n_p) - 1);
  double k = std::floor(std::ldexp(v, n_p));
  if (k < 0) k = 0;
  if (k > top) k = top;
  return static_cast<std::uint64_t>(k);
}

std::vector<int> key_bits(std::uint64_t key, int n_p) {
  std::vector<int> b(n_p);
  for (int k = 0; k < n_p; ++k) b[k] = static_cast<int>((key >> (n_p - 1 - k)) & 1);
  return b;
}

std::string key_string(std::uint64_t key, int n_p) {
  std::string s;
  for (int b : key_bits(key, n_p)) s += static_cast<char>('0' + b);
  return s;
}

TPolicy t_policy_from_string(const std::string& s) {
  if (s == "reject") return TPolicy::reject;
  if (s == "clamp") return TPolicy::clamp;
  throw ConfigError("unknown t policy \"" + s + "\"");
}

TRule t_rule_from_string(const std::string& s) {
  if (s == "standard") return TRule::standard;
  if (s == "corrected") return TRule::corrected;
  throw ConfigError("unknown t rule \"" + s + "\"");
}

std::string to_string(TPolicy p) { return p == TPolicy::reject ? "reject" : "clamp"; }
std::string to_string(TRule r) { return r == TRule::standard ? "standard" : "corrected"; }

int t_count(double c, double delta, TRule rule) {
  if (!(c > 0.0 && c <= 1.0)) throw ConfigError("t(c, delta) needs c in (0,1]");
  double x = -0.5 * std::log2(delta * c) - (rule == TRule::standard ? 0.5 : 0.0);
  int t = static_cast<int>(std::ceil(x - 1e-12));
  return std::max(t, 0);
}

int t_checked(double c, const PrecisionParams& params, const std::string& where, bool* clamped) {
  int t = t_count(c, params.delta, params.t_rule);
  if (clamped) *clamped = false;
  if (t > params.t_max) {
    if (params.t_policy == TPolicy::reject)
      throw ResourceOverflow("t = " + std::to_string(t) + " exceeds t_max = " + std::to_string(params.t_max) +
                             " at " + where);
    if (clamped) *clamped = true;
    t = params.t_max;
  }
  return t;
}

std::uint64_t threshold_key(std::uint64_t prefix_value, int k, int n_p) {
  return (prefix_value << (n_p - k + 1)) | (std::uint64_t{1} << (n_p - k));
}

// ---------------------------------------------------------------- gate level

namespace {

OpFn as_op(const Circuit& c, bool inverted = false) {
  return [c, inverted](QuantumState& s, const Controls& ctl, bool adj) { c.apply(s, ctl, adj != inverted); };
}

}  // namespace

Circuit build_uaa(const Circuit& state_prep, const std::vector<std::string>& target_regs,
                  std::function<void(QuantumState&, const Controls&)> marking) {
  Circuit c;
  // diagonal pieces are self-inverse
  c.add([marking](QuantumState& s, const Controls& ctl, bool) { marking(s, ctl); });
  c.add(as_op(state_prep, true));
  c.add([target_regs](QuantumState& s, const Controls& ctl, bool) { s.reflect_zero(target_regs, ctl); });
  c.add(as_op(state_prep));
  return c;
}

Circuit phase_test_circuit(const Circuit& u_pe0, const Circuit& u_o, const PhaseTestRegs& regs,
                           PhaseTestCount* count) {
  Circuit qpe;
  const std::string est = regs.est;
  qpe.add([est](QuantumState& s, const Controls& c, bool) { s.apply_hadamard_all(est, c); });
  // est bit j (j = 0 least significant) controls U_o^(2^j)
  qpe.add([est, u_o, count](QuantumState& s, const Controls& c, bool adj) {
    const Register& r = s.layout().get(est);
    auto one = [&](int j) {
      for (std::uint64_t rep = 0; rep < pow2(j); ++rep) {
        u_o.apply(s, c.with(r.offset + j), adj);
        if (count) ++count->u_o;
      }
    };
    if (!adj)
      for (int j = 0; j < r.width; ++j) one(j);
    else
      for (int j = r.width - 1; j >= 0; --j) one(j);
  });
  qpe.add([est](QuantumState& s, const Controls& c, bool adj) {
    if (adj)
      s.apply_qft(est, c);
    else
      s.apply_qft_inverse(est, c);
  });

  Circuit pt;
  pt.add([u_pe0, count](QuantumState& s, const Controls& c, bool adj) {
    u_pe0.apply(s, c, adj);
    if (count) ++count->u_pe0;
  });
  pt.add(as_op(qpe));
  const int out = regs.out_qubit;
  pt.add([est, out](QuantumState& s, const Controls& c, bool) {
    const std::uint64_t em = s.reg_mask(est);
    const std::uint64_t ob = std::uint64_t{1} << out;
    s.apply_involution([em, ob](std::uint64_t i) { return (i & em) ? (i ^ ob) : i; }, c);
  });
  pt.add(as_op(qpe, true));
  pt.add([u_pe0, count](QuantumState& s, const Controls& c, bool adj) {
    u_pe0.apply(s, c, !adj);
    if (count) ++count->u_pe0;
  });
  const std::vector<std::string> tgt = regs.target;
  const int aux = regs.aux_qubit;
  pt.add([est, tgt, out, aux](QuantumState& s, const Controls& c, bool) {
    std::uint64_t dirty = s.reg_mask(est);
    for (const auto& r : tgt) dirty |= s.reg_mask(r);
    const std::uint64_t ob = std::uint64_t{1} << out, ab = std::uint64_t{1} << aux;
    // |1>_out|0>_aux <-> |0>_out|1>_aux on the dirty workspace
    s.apply_involution(
        [=](std::uint64_t i) {
          if (!(i & dirty)) return i;
          bool o = i & ob, a = i & ab;
          return o != a ? (i ^ ob ^ ab) : i;
        },
        c);
  });
  return pt;
}

void add_umax_registers(RegisterLayout& layout, const UMaxSpec& spec, int owner) {
  layout.add(spec.st, spec.t, owner);
  layout.add(spec.sr, spec.n_bits, owner);
  layout.add(spec.p, spec.n_p, owner);
  layout.add(spec.aux, spec.n_p, owner);
}

Circuit default_state_prep(const std::string& reg, std::uint64_t* queries) {
  Circuit c;
  c.add([reg, queries](QuantumState& s, const Controls& ctl, bool) {
    s.apply_hadamard_all(reg, ctl);
    if (queries) ++*queries;
  });
  return c;
}

Circuit u_max_circuit(const UMaxSpec& spec, std::uint64_t* queries) {
  Circuit prep = default_state_prep(spec.sr, queries);
  Circuit out;
  for (int k = 1; k <= spec.n_p; ++k) {
    // marking oracle: block diagonal over the prefix held in q_p bits 1..k-1
    auto marking = [spec, k](QuantumState& s, const Controls& ctl) {
      const Register& sr = s.layout().get(spec.sr);
      const Register& p = s.layout().get(spec.p);
      const Register* cx = spec.ctx.empty() ? nullptr : &s.layout().get(spec.ctx);
      s.apply_sign(
          [&](std::uint64_t i) {
            std::uint64_t y = (i >> sr.offset) & (pow2(sr.width) - 1);
            std::uint64_t pv = (i >> p.offset) & (pow2(p.width) - 1);
            std::uint64_t cv = cx ? (i >> cx->offset) & (pow2(cx->width) - 1) : 0;
            std::uint64_t prefix = pv >> (spec.n_p - k + 1);
            std::uint64_t th = threshold_key(prefix, k, spec.n_p);
            return floor_key(spec.f(cv, y), spec.n_p) >= th;
          },
          ctl);
    };
    Circuit uaa = build_uaa(prep, {spec.sr}, marking);
    PhaseTestRegs regs;
    regs.est = spec.st;
    regs.target = {spec.sr};
    regs.out_qubit = 0;
    regs.aux_qubit = 0;
    // qubit indices are resolved against the layout the circuit is applied to
    out.add([prep, uaa, regs, spec, k](QuantumState& s, const Controls& ctl, bool adj) {
      PhaseTestRegs r = regs;
      r.out_qubit = s.layout().qubit(spec.p, k);
      r.aux_qubit = s.layout().qubit(spec.aux, k);
      phase_test_circuit(prep, uaa, r).apply(s, ctl, adj);
    });
  }
  return out;
}

// ---------------------------------------------------------------- compact engine

std::vector<double> uniform_weights(const std::vector<double>& values, int n_p) {
  std::vector<double> w(pow2(n_p), 0.0);
  if (values.empty()) return w;
  const double inv = 1.0 / static_cast<double>(values.size());
  for (double v : values) w[floor_key(v, n_p)] += inv;
  return w;
}

namespace {

struct CompactState {
  int n_p, t;
  std::size_t M, E, Q, A;
  std::vector<double> u;              // sqrt weights of active classes
  std::vector<std::uint64_t> keys;    // key of each active class
  std::vector<cplx> a;
  std::vector<char> act;  // (aux, q) sectors that may hold amplitude

  bool active(std::size_t aa, std::size_t q) const { return act[aa * Q + q] != 0; }
  void touch(std::size_t aa, std::size_t q) { act[aa * Q + q] = 1; }

  std::size_t idx(std::size_t aa, std::size_t q, std::size_t e, std::size_t s) const {
    return ((aa * Q + q) * E + e) * M + s;
  }
  cplx* slice(std::size_t aa, std::size_t q, std::size_t e) { return &a[idx(aa, q, e, 0)]; }

  void est_transform(const std::vector<cplx>& mat) {
    std::vector<cplx> in(E), out(E);
    for (std::size_t aa = 0; aa < A; ++aa)
      for (std::size_t q = 0; q < Q; ++q) {
        if (!active(aa, q)) continue;
        for (std::size_t s = 0; s < M; ++s) {
          bool any = false;
          for (std::size_t e = 0; e < E; ++e) {
            in[e] = a[idx(aa, q, e, s)];
            any = any || in[e] != cplx{0, 0};
          }
          if (!any) continue;
          for (std::size_t r = 0; r < E; ++r) {
            cplx acc = 0;
            for (std::size_t e = 0; e < E; ++e) acc += mat[r * E + e] * in[e];
            out[r] = acc;
          }
          for (std::size_t e = 0; e < E; ++e) a[idx(aa, q, e, s)] = out[e];
        }
      }
  }

  // one U_AA (or its adjoint) on every slice with est bit j set
  void uaa(int k, int j, bool adjoint) {
    const int shift = n_p - k + 1;
    for (std::size_t aa = 0; aa < A; ++aa)
      for (std::size_t q = 0; q < Q; ++q) {
        if (!active(aa, q)) continue;
        const std::uint64_t th = threshold_key(q >> shift, k, n_p);
        for (std::size_t e = 0; e < E; ++e) {
          if (!((e >> j) & 1)) continue;
          cplx* v = slice(aa, q, e);
          auto mark = [&] {
            for (std::size_t s = 0; s < M; ++s)
              if (keys[s] >= th) v[s] = -v[s];
          };
          auto reflect = [&] {
            cplx d = 0;
            for (std::size_t s = 0; s < M; ++s) d += u[s] * v[s];
            for (std::size_t s = 0; s < M; ++s) v[s] = 2.0 * u[s] * d - v[s];
          };
          if (!adjoint) {
            mark();
            reflect();
          } else {
            reflect();
            mark();
          }
        }
      }
  }

  double norm2() const {
    double n = 0;
    for (const cplx& x : a) n += std::norm(x);
    return n;
  }
};

std::vector<cplx> hadamard_matrix(std::size_t E) {
  std::vector<cplx> m(E * E);
  const double s = 1.0 / std::sqrt(static_cast<double>(E));
  for (std::size_t r = 0; r < E; ++r)
    for (std::size_t c = 0; c < E; ++c) m[r * E + c] = (__builtin_popcountll(r & c) & 1) ? -s : s;
  return m;
}

std::vector<cplx> qft_matrix(std::size_t E, double sign) {
  std::vector<cplx> m(E * E);
  const double s = 1.0 / std::sqrt(static_cast<double>(E));
  for (std::size_t r = 0; r < E; ++r)
    for (std::size_t c = 0; c < E; ++c)
      m[r * E + c] = s * std::polar(1.0, sign * 2.0 * std::numbers::pi * static_cast<double>((r * c) % E) /
                                             static_cast<double>(E));
  return m;
}

}  // namespace

CompactResult compact_max(const std::vector<double>& weights, int n_p, int t, const CompactOptions& opt) {
  if (weights.size() != pow2(n_p)) throw ConfigError("compact_max: weight vector must have 2^N_p entries");
  CompactResult res;
  res.n_p = n_p;
  res.t = t;
  res.weights = weights;
  CompactState st;
  st.n_p = n_p;
  st.t = t;
  double total = 0;
  for (std::size_t key = 0; key < weights.size(); ++key) {
    if (weights[key] < 0) throw ConfigError("compact_max: negative weight");
    if (weights[key] > 0) {
      st.keys.push_back(key);
      st.u.push_back(std::sqrt(weights[key]));
      total += weights[key];
      res.correct_key = key;
    }
  }
  if (st.keys.empty() || std::fabs(total - 1.0) > 1e-9) throw ConfigError("compact_max: weights must sum to 1");
  st.M = st.keys.size();
  st.E = pow2(t);
  st.Q = pow2(n_p);
  st.A = opt.keep_aux ? pow2(n_p) : 1;
  st.a.assign(st.A * st.Q * st.E * st.M, cplx{0, 0});
  st.act.assign(st.A * st.Q, 0);
  st.touch(0, 0);
  // B frame: the all-zero target is sum_s u_s f_s
  for (std::size_t s = 0; s < st.M; ++s) st.a[st.idx(0, 0, 0, s)] = st.u[s];

  const auto H = hadamard_matrix(st.E);
  const auto F = qft_matrix(st.E, 1.0);
  const auto Fi = qft_matrix(st.E, -1.0);
  const CompactHooks& hk = opt.hooks;
  auto prep = [&](bool adj) {
    ++res.prep_calls;
    if (hk.on_prep) hk.on_prep(adj);
  };
  auto uaa_all = [&](int k, int j, bool adj) {
    st.uaa(k, j, adj);
    ++res.uaa_calls;
    ++res.reflections;
    prep(true);
    if (hk.on_reflection) hk.on_reflection();
    prep(false);
  };

  for (int k = 1; k <= n_p; ++k) {
    // p_z along the correct prefix
    {
      std::uint64_t th = threshold_key(res.correct_key >> (n_p - k + 1), k, n_p);
      double pz = 0;
      for (std::size_t key = th; key < weights.size(); ++key) pz += weights[key];
      res.p_z.push_back(pz);
    }
    // 1. initialization: B frame -> A frame
    prep(false);
    // 2. forward QPE
    if (hk.on_test_begin) hk.on_test_begin(k);
    st.est_transform(H);
    for (int j = 0; j < t; ++j)
      for (std::uint64_t rep = 0; rep < pow2(j); ++rep) uaa_all(k, j, false);
    st.est_transform(Fi);
    // 3. conditional flip of q_p(k) on est != 0
    const std::size_t ob = std::size_t{1} << (n_p - k);
    for (std::size_t aa = 0; aa < st.A; ++aa)
      for (std::size_t q = 0; q < st.Q; ++q) {
        if (q & ob) continue;
        if (!st.active(aa, q) && !st.active(aa, q | ob)) continue;
        st.touch(aa, q);
        st.touch(aa, q | ob);
        for (std::size_t e = 1; e < st.E; ++e) {
          cplx* v0 = st.slice(aa, q, e);
          cplx* v1 = st.slice(aa, q | ob, e);
          for (std::size_t s = 0; s < st.M; ++s) std::swap(v0[s], v1[s]);
        }
      }
    // 4. inverse QPE
    st.est_transform(F);
    for (int j = t - 1; j >= 0; --j)
      for (std::uint64_t rep = 0; rep < pow2(j); ++rep) uaa_all(k, j, true);
    st.est_transform(H);
    if (hk.on_test_end) hk.on_test_end(k);
    // 5. inverse initialization: A frame -> B frame
    prep(true);
    // 6. error mitigation: output 1 with dirty (est, target) moves to aux
    const std::size_t ab = std::size_t{1} << (k - 1);
    for (std::size_t aa = 0; aa < st.A; ++aa) {
      if (opt.keep_aux && (aa & ab)) continue;
      for (std::size_t q = 0; q < st.Q; ++q) {
        if (!(q & ob) || !st.active(aa, q)) continue;
        if (opt.keep_aux) st.touch(aa | ab, q ^ ob);
        for (std::size_t e = 0; e < st.E; ++e) {
          cplx* v = st.slice(aa, q, e);
          cplx* dst = opt.keep_aux ? st.slice(aa | ab, q ^ ob, e) : nullptr;
          if (e != 0) {
            for (std::size_t s = 0; s < st.M; ++s) {
              if (dst)
                dst[s] = v[s];
              else
                res.dropped_mass += std::norm(v[s]);
              v[s] = 0;
            }
          } else {
            cplx d = 0;
            for (std::size_t s = 0; s < st.M; ++s) d += st.u[s] * v[s];
            for (std::size_t s = 0; s < st.M; ++s) {
              cplx r = v[s] - d * st.u[s];
              if (dst)
                dst[s] = r;
              else
                res.dropped_mass += std::norm(r);
              v[s] = d * st.u[s];
            }
          }
        }
      }
    }
    double n = st.norm2() + res.dropped_mass;
    res.max_norm_error = std::max(res.max_norm_error, std::fabs(n - 1.0));
  }

  res.marginal.assign(st.Q, 0.0);
  res.clean_mass.assign(st.Q, 0.0);
  for (std::size_t aa = 0; aa < st.A; ++aa)
    for (std::size_t q = 0; q < st.Q; ++q)
      for (std::size_t e = 0; e < st.E; ++e) {
        cplx* v = st.slice(aa, q, e);
        for (std::size_t s = 0; s < st.M; ++s) res.marginal[q] += std::norm(v[s]);
      }
  for (std::size_t q = 0; q < st.Q; ++q) {
    cplx* v = st.slice(0, q, 0);
    cplx d = 0;
    for (std::size_t s = 0; s < st.M; ++s) d += st.u[s] * v[s];
    res.clean_mass[q] = std::norm(d);
  }
  return res;
}

}  // namespace qfn
