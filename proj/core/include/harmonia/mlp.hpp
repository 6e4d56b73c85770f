#pragma once

// Multilayer perceptrons that propagate second-order jets, with a matching
// adjoint pass for exact parameter gradients.
//
// The same template serves real networks (T = double) and complex-weight
// networks (T = std::complex<double>). Activations of the complex networks
// must be holomorphic. Adjoints follow the convention
//   q_bar = dL/dRe(q) + i dL/dIm(q),
// under which a holomorphic step p = g(q) back-propagates as
//   q_bar += conj(g'(q)) * p_bar,
// so the real case is the special case conj(x) = x.
//
// Activations are stored per layer as an [unit][component] matrix where the
// components of a jet are laid out as (value, gradient[D], hessian[D*D]).
// The batched path stores a layer as [unit][component][point] and runs each
// layer as dense matrix products; it is defined in mlp_batch.cpp for
// D in {2, 3, 4} and T in {double, complex<double>}.

#include <cmath>
#include <complex>
#include <cstddef>
#include <new>
#include <span>
#include <string>
#include <vector>

#include "harmonia/error.hpp"
#include "harmonia/jet.hpp"
#include "harmonia/rng.hpp"

namespace harmonia {

/// 64-byte aligned storage, so vectorized reductions over batch buffers do
/// not depend on where the allocator placed them.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};
  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}
  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }
  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

enum class Activation { tanh, sin, exp };

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::tanh: return "tanh";
    case Activation::sin: return "sin";
    case Activation::exp: return "exp";
  }
  return "?";
}

struct MlpSpec {
  int input_dim = 2;
  int hidden_layers = 3;
  int width = 32;
  Activation activation = Activation::tanh;
  int output_dim = 1;

  void validate() const {
    if (input_dim < 1) throw Error("MlpSpec: input_dim must be >= 1");
    if (hidden_layers < 1) throw Error("MlpSpec: hidden_layers must be >= 1");
    if (width < 1) throw Error("MlpSpec: width must be >= 1");
    if (output_dim < 1) throw Error("MlpSpec: output_dim must be >= 1");
  }

  /// Complex networks are only harmonic for holomorphic activations.
  void validate_complex() const {
    validate();
    if (activation == Activation::tanh) {
      throw IncompatibleError("MlpSpec: tanh is not accepted for complex networks; use sin or exp");
    }
  }
};

namespace detail {

/// sigma and its first three derivatives at z.
template <class T>
struct ActivationDerivs {
  T f0, f1, f2, f3;
};

template <class T>
inline ActivationDerivs<T> activation_derivs(Activation act, const T& z) {
  using std::cos;
  using std::exp;
  using std::sin;
  using std::tanh;
  switch (act) {
    case Activation::tanh: {
      const T t = tanh(z);
      const T d1 = T(1) - t * t;
      const T d2 = T(-2) * t * d1;
      const T d3 = T(-2) * (d1 * d1 + t * d2);
      return {t, d1, d2, d3};
    }
    case Activation::sin: {
      const T s = sin(z);
      const T c = cos(z);
      return {s, c, -s, -c};
    }
    case Activation::exp: {
      const T e = exp(z);
      return {e, e, e, e};
    }
  }
  return {T(0), T(0), T(0), T(0)};
}

}  // namespace detail

template <int D, class T>
class Mlp {
 public:
  static constexpr int K = 1 + D + D * D;
  static constexpr int kScalarsPerEntry = is_complex_v<T> ? 2 : 1;

  /// Per-evaluation scratch memory. Reuse one tape across points.
  struct Tape {
    int order = 2;
    std::vector<std::vector<T>> act;  // act[0] is the input, act[L] the output
    std::vector<std::vector<T>> pre;  // pre-activations of hidden layers
    // Adjoint scratch, sized lazily by backward().
    std::vector<std::vector<T>> act_adj;
    std::vector<T> pre_adj;
  };

  /// Scratch memory for forward_batch()/backward_batch().
  struct BatchTape {
    using Buffer = std::vector<T, AlignedAllocator<T>>;
    int order = 2;
    int points = 0;
    std::vector<Buffer> act;  // [unit][component][point]
    std::vector<Buffer> pre;
    std::vector<Buffer> deriv;  // [unit][f1, f2, f3][point] per hidden layer
    Buffer adj_a;
    Buffer adj_b;
    Buffer adj_c;
    Buffer params;  // aligned copy of the parameters
    Buffer grad;    // gradient accumulator
  };

  Mlp() = default;

  explicit Mlp(MlpSpec spec) : spec_(spec) {
    if constexpr (is_complex_v<T>) {
      spec_.validate_complex();
    } else {
      spec_.validate();
    }
    dims_.push_back(spec_.input_dim);
    for (int l = 0; l < spec_.hidden_layers; ++l) dims_.push_back(spec_.width);
    dims_.push_back(spec_.output_dim);
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
      w_offset_.push_back(off);
      off += static_cast<std::size_t>(dims_[l + 1] * dims_[l]);
      b_offset_.push_back(off);
      off += static_cast<std::size_t>(dims_[l + 1]);
    }
    entries_ = off;
  }

  const MlpSpec& spec() const { return spec_; }
  int layers() const { return static_cast<int>(dims_.size()) - 1; }

  /// Number of doubles in the flat parameter vector.
  std::size_t param_count() const { return entries_ * kScalarsPerEntry; }

  /// Kaiming-uniform weights with negative slope sqrt(5), the torch.nn.Linear
  /// default (bound 1/sqrt(fan_in)), and biases uniform in +-1/sqrt(fan_in). Complex entries draw real and imaginary parts
  /// independently and scale each by 1/sqrt(2) so E|w|^2 matches the real case.
  std::vector<double> init(Rng& rng) const {
    std::vector<double> p(param_count());
    const double part_scale = is_complex_v<T> ? 1.0 / std::sqrt(2.0) : 1.0;
    for (int l = 0; l < layers(); ++l) {
      const double fan_in = dims_[static_cast<std::size_t>(l)];
      const double wb = 1.0 / std::sqrt(fan_in) * part_scale;
      const double bb = 1.0 / std::sqrt(fan_in) * part_scale;
      const std::size_t w0 = w_offset_[static_cast<std::size_t>(l)] * kScalarsPerEntry;
      const std::size_t b0 = b_offset_[static_cast<std::size_t>(l)] * kScalarsPerEntry;
      const std::size_t b1 = b0 + static_cast<std::size_t>(dims_[static_cast<std::size_t>(l) + 1]) * kScalarsPerEntry;
      for (std::size_t i = w0; i < b0; ++i) p[i] = rng.uniform(-wb, wb);
      for (std::size_t i = b0; i < b1; ++i) p[i] = rng.uniform(-bb, bb);
    }
    return p;
  }

  static int components(int order) { return order <= 0 ? 1 : (order == 1 ? 1 + D : K); }

  /// Propagate `input` (input_dim jets) through the network. order 0 keeps
  /// values only, 1 adds gradients, 2 adds Hessians.
  void forward(std::span<const double> params, std::span<const Jet<D, T>> input, int order,
               Tape& tape) const {
    if (input.size() != static_cast<std::size_t>(spec_.input_dim)) {
      throw Error("Mlp::forward: expected " + std::to_string(spec_.input_dim) + " inputs, got " +
                  std::to_string(input.size()));
    }
    if (params.size() != param_count()) throw Error("Mlp::forward: parameter vector has the wrong length");
    const int L = layers();
    const int kc = components(order);
    tape.order = order;
    tape.act.resize(static_cast<std::size_t>(L) + 1);
    tape.pre.resize(static_cast<std::size_t>(L));
    auto& a0 = tape.act[0];
    a0.assign(static_cast<std::size_t>(spec_.input_dim * K), T(0));
    for (int j = 0; j < spec_.input_dim; ++j) store(a0.data() + j * K, input[static_cast<std::size_t>(j)]);

    const T* P = entries(params);
    for (int l = 0; l < L; ++l) {
      const int nin = dims_[static_cast<std::size_t>(l)];
      const int nout = dims_[static_cast<std::size_t>(l) + 1];
      const T* W = P + w_offset_[static_cast<std::size_t>(l)];
      const T* b = P + b_offset_[static_cast<std::size_t>(l)];
      const std::vector<T>& a = tape.act[static_cast<std::size_t>(l)];
      std::vector<T>& z = tape.pre[static_cast<std::size_t>(l)];
      z.assign(static_cast<std::size_t>(nout * K), T(0));
      for (int i = 0; i < nout; ++i) {
        T* zi = z.data() + i * K;
        zi[0] = b[i];
        const T* Wi = W + i * nin;
        for (int j = 0; j < nin; ++j) {
          const T w = Wi[j];
          const T* aj = a.data() + j * K;
          for (int c = 0; c < kc; ++c) zi[c] += w * aj[c];
        }
      }
      std::vector<T>& out = tape.act[static_cast<std::size_t>(l) + 1];
      if (l == L - 1) {
        out = z;
      } else {
        out.assign(static_cast<std::size_t>(nout * K), T(0));
        for (int i = 0; i < nout; ++i) activate(z.data() + i * K, out.data() + i * K, order);
      }
    }
  }

  /// forward() on `points` inputs at once; inputs are point-major
  /// (input_dim jets per point).
  void forward_batch(std::span<const double> params, std::span<const Jet<D, T>> inputs, int points, int order,
                     BatchTape& tape) const;

  /// Output k of point p after forward_batch().
  Jet<D, T> batch_output(const BatchTape& tape, int p, int k = 0) const;

  /// backward() for a batch; out_adj is point-major (output_dim per point).
  void backward_batch(std::span<const double> params, BatchTape& tape, std::span<const Jet<D, T>> out_adj,
                      std::span<double> grad) const;

  Jet<D, T> output(const Tape& tape, int k = 0) const {
    Jet<D, T> r;
    load(tape.act.back().data() + k * K, r);
    return r;
  }

  /// Accumulate dL/dparams into `grad` given the adjoints of the outputs of
  /// the most recent forward() on `tape`.
  void backward(std::span<const double> params, Tape& tape, std::span<const Jet<D, T>> out_adj,
                std::span<double> grad) const {
    if (out_adj.size() != static_cast<std::size_t>(spec_.output_dim)) {
      throw Error("Mlp::backward: expected one adjoint per output");
    }
    if (grad.size() != param_count()) throw Error("Mlp::backward: gradient vector has the wrong length");
    const int L = layers();
    const int order = tape.order;
    const int kc = components(order);
    const T* P = entries(params);
    T* G = reinterpret_cast<T*>(grad.data());

    tape.act_adj.resize(static_cast<std::size_t>(L) + 1);
    auto& top = tape.act_adj[static_cast<std::size_t>(L)];
    top.assign(static_cast<std::size_t>(spec_.output_dim * K), T(0));
    for (int k = 0; k < spec_.output_dim; ++k) store(top.data() + k * K, out_adj[static_cast<std::size_t>(k)]);

    for (int l = L - 1; l >= 0; --l) {
      const int nin = dims_[static_cast<std::size_t>(l)];
      const int nout = dims_[static_cast<std::size_t>(l) + 1];
      const std::vector<T>& abar_out = tape.act_adj[static_cast<std::size_t>(l) + 1];
      const T* zbar = nullptr;
      if (l == L - 1) {
        zbar = abar_out.data();
      } else {
        tape.pre_adj.assign(static_cast<std::size_t>(nout * K), T(0));
        const std::vector<T>& z = tape.pre[static_cast<std::size_t>(l)];
        for (int i = 0; i < nout; ++i) {
          activate_backward(z.data() + i * K, abar_out.data() + i * K, tape.pre_adj.data() + i * K, order);
        }
        zbar = tape.pre_adj.data();
      }
      const T* W = P + w_offset_[static_cast<std::size_t>(l)];
      T* Wbar = G + w_offset_[static_cast<std::size_t>(l)];
      T* bbar = G + b_offset_[static_cast<std::size_t>(l)];
      const std::vector<T>& a = tape.act[static_cast<std::size_t>(l)];
      std::vector<T>* abar_in = nullptr;
      if (l > 0) {
        abar_in = &tape.act_adj[static_cast<std::size_t>(l)];
        abar_in->assign(static_cast<std::size_t>(nin * K), T(0));
      }
      for (int i = 0; i < nout; ++i) {
        const T* zb = zbar + i * K;
        bbar[i] += zb[0];
        const T* Wi = W + i * nin;
        T* Wbi = Wbar + i * nin;
        for (int j = 0; j < nin; ++j) {
          const T* aj = a.data() + j * K;
          T acc{};
          for (int c = 0; c < kc; ++c) acc += zb[c] * conj_if(aj[c]);
          Wbi[j] += acc;
          if (abar_in) {
            const T wc = conj_if(Wi[j]);
            T* abj = abar_in->data() + j * K;
            for (int c = 0; c < kc; ++c) abj[c] += wc * zb[c];
          }
        }
      }
    }
  }

 private:
  static const T* entries(std::span<const double> params) {
    // std::complex<double> is layout-compatible with double[2].
    return reinterpret_cast<const T*>(params.data());
  }

  static void store(T* dst, const Jet<D, T>& j) {
    dst[0] = j.v;
    for (int i = 0; i < D; ++i) dst[1 + i] = j.g[static_cast<std::size_t>(i)];
    for (int i = 0; i < D * D; ++i) dst[1 + D + i] = j.h[static_cast<std::size_t>(i)];
  }

  static void load(const T* src, Jet<D, T>& j) {
    j.v = src[0];
    for (int i = 0; i < D; ++i) j.g[static_cast<std::size_t>(i)] = src[1 + i];
    for (int i = 0; i < D * D; ++i) j.h[static_cast<std::size_t>(i)] = src[1 + D + i];
  }

  void activate(const T* z, T* s, int order) const {
    const auto d = detail::activation_derivs(spec_.activation, z[0]);
    s[0] = d.f0;
    if (order < 1) return;
    const T* zg = z + 1;
    for (int i = 0; i < D; ++i) s[1 + i] = d.f1 * zg[i];
    if (order < 2) return;
    const T* zh = z + 1 + D;
    T* sh = s + 1 + D;
    for (int i = 0; i < D; ++i) {
      for (int j = 0; j < D; ++j) sh[i * D + j] = d.f2 * (zg[i] * zg[j]) + d.f1 * zh[i * D + j];
    }
  }

  void activate_backward(const T* z, const T* sbar, T* zbar, int order) const {
    const auto d = detail::activation_derivs(spec_.activation, z[0]);
    const T c1 = conj_if(d.f1);
    zbar[0] = c1 * sbar[0];
    if (order < 1) return;
    const T c2 = conj_if(d.f2);
    const T* zg = z + 1;
    const T* gbar = sbar + 1;
    T acc{};
    for (int k = 0; k < D; ++k) {
      acc += conj_if(zg[k]) * gbar[k];
      zbar[1 + k] = c1 * gbar[k];
    }
    zbar[0] += c2 * acc;
    if (order < 2) return;
    const T c3 = conj_if(d.f3);
    const T* zh = z + 1 + D;
    const T* hbar = sbar + 1 + D;
    T acc3{};
    T acc2{};
    for (int i = 0; i < D; ++i) {
      for (int j = 0; j < D; ++j) {
        const T hb = hbar[i * D + j];
        acc3 += conj_if(zg[i] * zg[j]) * hb;
        acc2 += conj_if(zh[i * D + j]) * hb;
        zbar[1 + D + i * D + j] = c1 * hb;
      }
    }
    zbar[0] += c3 * acc3 + c2 * acc2;
    for (int k = 0; k < D; ++k) {
      T s{};
      for (int j = 0; j < D; ++j) s += (hbar[k * D + j] + hbar[j * D + k]) * conj_if(zg[j]);
      zbar[1 + k] += c2 * s;
    }
  }

  MlpSpec spec_{};
  std::vector<int> dims_;
  std::vector<std::size_t> w_offset_;
  std::vector<std::size_t> b_offset_;
  std::size_t entries_ = 0;
};

}  // namespace harmonia
