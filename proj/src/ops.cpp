#include "hvr/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hvr {

namespace {

constexpr double kEps = 1e-12;

void check(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void accumulate(detail::TensorNode& parent, std::size_t i, double g) {
  parent.grad[i] += g;
}

bool prep(detail::TensorNode& parent) {
  if (!parent.requires_grad) return false;
  parent.ensure_grad();
  return true;
}

}  // namespace

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  check(a.rank() == b.rank() && a.rank() >= 1,
        "concat_channels: rank mismatch " + shape_str(a.dims()) + " vs " +
            shape_str(b.dims()));
  for (std::size_t i = 0; i + 1 < a.rank(); ++i)
    check(a.dims()[i] == b.dims()[i],
          "concat_channels: leading dims differ " + shape_str(a.dims()) +
              " vs " + shape_str(b.dims()));
  const std::size_t ca = a.dims().back();
  const std::size_t cb = b.dims().back();
  const std::size_t cells = a.size() / ca;

  Shape out_dims = a.dims();
  out_dims.back() = ca + cb;
  std::vector<double> out(cells * (ca + cb));
  for (std::size_t s = 0; s < cells; ++s) {
    for (std::size_t c = 0; c < ca; ++c) out[s * (ca + cb) + c] = a[s * ca + c];
    for (std::size_t c = 0; c < cb; ++c)
      out[s * (ca + cb) + ca + c] = b[s * cb + c];
  }

  return detail::make_result(
      std::move(out_dims), std::move(out), {a, b},
      [cells, ca, cb](detail::TensorNode& o) {
        auto& pa = *o.parents[0];
        auto& pb = *o.parents[1];
        const bool ga = prep(pa), gb = prep(pb);
        for (std::size_t s = 0; s < cells; ++s) {
          if (ga)
            for (std::size_t c = 0; c < ca; ++c)
              accumulate(pa, s * ca + c, o.grad[s * (ca + cb) + c]);
          if (gb)
            for (std::size_t c = 0; c < cb; ++c)
              accumulate(pb, s * cb + c, o.grad[s * (ca + cb) + ca + c]);
        }
      });
}

Tensor conv3d(const Tensor& input, const Tensor& weights,
              std::array<int, 3> stride, std::array<int, 3> pad) {
  check(input.rank() == 4, "conv3d: input must be (X,Y,Z,C), got " +
                               shape_str(input.dims()));
  check(weights.rank() == 5, "conv3d: weights must be (kx,ky,kz,Ci,Co), got " +
                                 shape_str(weights.dims()));
  const int X = static_cast<int>(input.dims()[0]);
  const int Y = static_cast<int>(input.dims()[1]);
  const int Z = static_cast<int>(input.dims()[2]);
  const int Ci = static_cast<int>(input.dims()[3]);
  const int kx = static_cast<int>(weights.dims()[0]);
  const int ky = static_cast<int>(weights.dims()[1]);
  const int kz = static_cast<int>(weights.dims()[2]);
  check(static_cast<int>(weights.dims()[3]) == Ci,
        "conv3d: channel mismatch, input " + shape_str(input.dims()) +
            " weights " + shape_str(weights.dims()));
  const int Co = static_cast<int>(weights.dims()[4]);
  check(stride[0] > 0 && stride[1] > 0 && stride[2] > 0, "conv3d: stride > 0");
  const int ox = (X + 2 * pad[0] - kx) / stride[0] + 1;
  const int oy = (Y + 2 * pad[1] - ky) / stride[1] + 1;
  const int oz = (Z + 2 * pad[2] - kz) / stride[2] + 1;
  check(ox > 0 && oy > 0 && oz > 0, "conv3d: kernel larger than padded input");

  const auto& in = input.values();
  const auto& w = weights.values();
  std::vector<double> out(static_cast<std::size_t>(ox) * oy * oz * Co, 0.0);

  auto in_at = [=](int x, int y, int z) {
    return (static_cast<std::size_t>(x) * Y + y) * Z * Ci +
           static_cast<std::size_t>(z) * Ci;
  };
  auto w_at = [=](int a, int b, int c, int ci) {
    return (((static_cast<std::size_t>(a) * ky + b) * kz + c) * Ci + ci) * Co;
  };

  for (int x = 0; x < ox; ++x)
    for (int y = 0; y < oy; ++y)
      for (int z = 0; z < oz; ++z) {
        double* op = &out[((static_cast<std::size_t>(x) * oy + y) * oz + z) *
                          Co];
        for (int a = 0; a < kx; ++a) {
          const int ix = x * stride[0] - pad[0] + a;
          if (ix < 0 || ix >= X) continue;
          for (int b = 0; b < ky; ++b) {
            const int iy = y * stride[1] - pad[1] + b;
            if (iy < 0 || iy >= Y) continue;
            for (int c = 0; c < kz; ++c) {
              const int iz = z * stride[2] - pad[2] + c;
              if (iz < 0 || iz >= Z) continue;
              const double* ip = &in[in_at(ix, iy, iz)];
              for (int ci = 0; ci < Ci; ++ci) {
                const double v = ip[ci];
                if (v == 0.0) continue;
                const double* wp = &w[w_at(a, b, c, ci)];
                for (int co = 0; co < Co; ++co) op[co] += v * wp[co];
              }
            }
          }
        }
      }

  Shape out_dims{static_cast<std::size_t>(ox), static_cast<std::size_t>(oy),
                 static_cast<std::size_t>(oz), static_cast<std::size_t>(Co)};
  return detail::make_result(
      std::move(out_dims), std::move(out), {input, weights},
      [=](detail::TensorNode& o) {
        auto& pin = *o.parents[0];
        auto& pw = *o.parents[1];
        const bool gi = prep(pin), gw = prep(pw);
        if (!gi && !gw) return;
        for (int x = 0; x < ox; ++x)
          for (int y = 0; y < oy; ++y)
            for (int z = 0; z < oz; ++z) {
              const double* gp =
                  &o.grad[((static_cast<std::size_t>(x) * oy + y) * oz + z) *
                          Co];
              for (int a = 0; a < kx; ++a) {
                const int ix = x * stride[0] - pad[0] + a;
                if (ix < 0 || ix >= X) continue;
                for (int b = 0; b < ky; ++b) {
                  const int iy = y * stride[1] - pad[1] + b;
                  if (iy < 0 || iy >= Y) continue;
                  for (int c = 0; c < kz; ++c) {
                    const int iz = z * stride[2] - pad[2] + c;
                    if (iz < 0 || iz >= Z) continue;
                    const std::size_t ibase = in_at(ix, iy, iz);
                    const std::size_t wbase = w_at(a, b, c, 0);
                    for (int ci = 0; ci < Ci; ++ci) {
                      const double iv = pin.values[ibase + ci];
                      double gsum = 0.0;
                      const double* wp = &pw.values[wbase + ci * Co];
                      for (int co = 0; co < Co; ++co) {
                        const double g = gp[co];
                        if (gi) gsum += g * wp[co];
                        if (gw) pw.grad[wbase + ci * Co + co] += g * iv;
                      }
                      if (gi) pin.grad[ibase + ci] += gsum;
                    }
                  }
                }
              }
            }
      });
}

Tensor linear(const Tensor& x, const Tensor& weights) {
  check(x.rank() == 1, "linear: input must be rank-1, got " +
                           shape_str(x.dims()));
  check(weights.rank() == 2 && weights.dims()[0] == x.dims()[0],
        "linear: weights " + shape_str(weights.dims()) + " vs input " +
            shape_str(x.dims()));
  const std::size_t ci = x.dims()[0];
  const std::size_t co = weights.dims()[1];
  std::vector<double> out(co, 0.0);
  for (std::size_t i = 0; i < ci; ++i) {
    const double v = x[i];
    for (std::size_t o = 0; o < co; ++o) out[o] += v * weights[i * co + o];
  }
  return detail::make_result(
      {co}, std::move(out), {x, weights},
      [ci, co](detail::TensorNode& n) {
        auto& px = *n.parents[0];
        auto& pw = *n.parents[1];
        const bool gx = prep(px), gw = prep(pw);
        for (std::size_t i = 0; i < ci; ++i) {
          double gsum = 0.0;
          for (std::size_t o = 0; o < co; ++o) {
            if (gx) gsum += n.grad[o] * pw.values[i * co + o];
            if (gw) pw.grad[i * co + o] += n.grad[o] * px.values[i];
          }
          if (gx) px.grad[i] += gsum;
        }
      });
}

Tensor relu(const Tensor& x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
  return detail::make_result(x.dims(), std::move(out), {x},
                             [](detail::TensorNode& n) {
                               auto& p = *n.parents[0];
                               if (!prep(p)) return;
                               for (std::size_t i = 0; i < n.grad.size(); ++i)
                                 if (p.values[i] > 0.0) p.grad[i] += n.grad[i];
                             });
}

Tensor avg_pool_spatial(const Tensor& x) {
  check(x.rank() >= 2, "avg_pool_spatial: needs spatial dims + channels");
  const std::size_t c = x.dims().back();
  const std::size_t cells = x.size() / c;
  std::vector<double> out(c, 0.0);
  for (std::size_t s = 0; s < cells; ++s)
    for (std::size_t k = 0; k < c; ++k) out[k] += x[s * c + k];
  const double inv = 1.0 / static_cast<double>(cells);
  for (double& v : out) v *= inv;
  return detail::make_result(
      {c}, std::move(out), {x}, [cells, c, inv](detail::TensorNode& n) {
        auto& p = *n.parents[0];
        if (!prep(p)) return;
        for (std::size_t s = 0; s < cells; ++s)
          for (std::size_t k = 0; k < c; ++k)
            p.grad[s * c + k] += n.grad[k] * inv;
      });
}

Tensor weighted_avg_pool(const Tensor& x, const Tensor& w) {
  check(x.rank() >= 2, "weighted_avg_pool: input needs channels");
  const std::size_t c = x.dims().back();
  const std::size_t cells = x.size() / c;
  check(w.size() == cells,
        "weighted_avg_pool: weights " + shape_str(w.dims()) +
            " do not cover input cells of " + shape_str(x.dims()));
  std::vector<double> out(c, 0.0);
  for (std::size_t s = 0; s < cells; ++s) {
    const double wv = w[s];
    for (std::size_t k = 0; k < c; ++k) out[k] += wv * x[s * c + k];
  }
  return detail::make_result(
      {c}, std::move(out), {x, w}, [cells, c](detail::TensorNode& n) {
        auto& px = *n.parents[0];
        auto& pw = *n.parents[1];
        const bool gx = prep(px), gw = prep(pw);
        for (std::size_t s = 0; s < cells; ++s) {
          double dot = 0.0;
          for (std::size_t k = 0; k < c; ++k) {
            if (gx) px.grad[s * c + k] += pw.values[s] * n.grad[k];
            dot += px.values[s * c + k] * n.grad[k];
          }
          if (gw) pw.grad[s] += dot;
        }
      });
}

Tensor softmax_grid(const Tensor& logits) {
  const std::size_t n = logits.size();
  check(n > 0, "softmax_grid: empty input");
  double mx = logits[0];
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, logits[i]);
  std::vector<double> out(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  const double inv = 1.0 / sum;
  for (double& v : out) v *= inv;
  return detail::make_result(
      logits.dims(), std::move(out), {logits}, [n](detail::TensorNode& o) {
        auto& p = *o.parents[0];
        if (!prep(p)) return;
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += o.grad[i] * o.values[i];
        for (std::size_t i = 0; i < n; ++i)
          p.grad[i] += o.values[i] * (o.grad[i] - dot);
      });
}

Tensor log_clamp(const Tensor& x, double eps) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = std::log(std::max(x[i], eps));
  return detail::make_result(
      x.dims(), std::move(out), {x}, [eps](detail::TensorNode& n) {
        auto& p = *n.parents[0];
        if (!prep(p)) return;
        for (std::size_t i = 0; i < n.grad.size(); ++i)
          if (p.values[i] > eps) p.grad[i] += n.grad[i] / p.values[i];
      });
}

Tensor add(const Tensor& a, const Tensor& b) {
  check(a.dims() == b.dims(), "add: shape mismatch " + shape_str(a.dims()) +
                                  " vs " + shape_str(b.dims()));
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return detail::make_result(a.dims(), std::move(out), {a, b},
                             [](detail::TensorNode& n) {
                               for (int k = 0; k < 2; ++k) {
                                 auto& p = *n.parents[k];
                                 if (!prep(p)) continue;
                                 for (std::size_t i = 0; i < n.grad.size(); ++i)
                                   p.grad[i] += n.grad[i];
                               }
                             });
}

Tensor add_const(const Tensor& x, const std::vector<double>& c) {
  check(c.size() == x.size(), "add_const: size mismatch");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + c[i];
  return detail::make_result(x.dims(), std::move(out), {x},
                             [](detail::TensorNode& n) {
                               auto& p = *n.parents[0];
                               if (!prep(p)) return;
                               for (std::size_t i = 0; i < n.grad.size(); ++i)
                                 p.grad[i] += n.grad[i];
                             });
}

Tensor scale(const Tensor& x, double s) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * s;
  return detail::make_result(x.dims(), std::move(out), {x},
                             [s](detail::TensorNode& n) {
                               auto& p = *n.parents[0];
                               if (!prep(p)) return;
                               for (std::size_t i = 0; i < n.grad.size(); ++i)
                                 p.grad[i] += n.grad[i] * s;
                             });
}

Tensor reshape(const Tensor& x, Shape dims) {
  check(shape_size(dims) == x.size(), "reshape: size mismatch " +
                                          shape_str(x.dims()) + " -> " +
                                          shape_str(dims));
  return detail::make_result(std::move(dims), x.values(), {x},
                             [](detail::TensorNode& n) {
                               auto& p = *n.parents[0];
                               if (!prep(p)) return;
                               for (std::size_t i = 0; i < n.grad.size(); ++i)
                                 p.grad[i] += n.grad[i];
                             });
}

Tensor broadcast_spatial(const Tensor& x, Shape spatial) {
  check(x.rank() == 1, "broadcast_spatial: input must be rank-1");
  const std::size_t c = x.size();
  const std::size_t cells = shape_size(spatial);
  Shape out_dims = std::move(spatial);
  out_dims.push_back(c);
  std::vector<double> out(cells * c);
  for (std::size_t s = 0; s < cells; ++s)
    for (std::size_t k = 0; k < c; ++k) out[s * c + k] = x[k];
  return detail::make_result(
      std::move(out_dims), std::move(out), {x},
      [cells, c](detail::TensorNode& n) {
        auto& p = *n.parents[0];
        if (!prep(p)) return;
        for (std::size_t s = 0; s < cells; ++s)
          for (std::size_t k = 0; k < c; ++k) p.grad[k] += n.grad[s * c + k];
      });
}

Tensor gumbel_softmax(const Tensor& r, double theta, Rng& rng) {
  std::vector<double> noise(r.size());
  for (double& g : noise) g = rng.gumbel();
  return gumbel_softmax_with_noise(r, theta, noise);
}

Tensor gumbel_softmax_with_noise(const Tensor& r, double theta,
                                 const std::vector<double>& noise) {
  check(theta > 0.0, "gumbel_softmax: theta must be > 0");
  Tensor perturbed = add_const(log_clamp(r, 1e-12), noise);
  return softmax_grid(scale(perturbed, 1.0 / theta));
}

Tensor kl_divergence(const Tensor& p, const Tensor& q) {
  check(p.dims() == q.dims(), "kl_divergence: shape mismatch " +
                                  shape_str(p.dims()) + " vs " +
                                  shape_str(q.dims()));
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    kl += p[i] * (std::log(std::max(p[i], kEps)) -
                  std::log(std::max(q[i], kEps)));
  const auto qv = q.values();
  return detail::make_result(
      {1}, {kl}, {p}, [qv](detail::TensorNode& n) {
        auto& pp = *n.parents[0];
        if (!prep(pp)) return;
        const double g = n.grad[0];
        for (std::size_t i = 0; i < pp.values.size(); ++i) {
          const double pv = pp.values[i];
          double d = std::log(std::max(pv, kEps)) -
                     std::log(std::max(qv[i], kEps));
          if (pv > kEps) d += 1.0;
          pp.grad[i] += g * d;
        }
      });
}

Tensor cross_entropy(const Tensor& logits, int label) {
  check(logits.rank() == 1, "cross_entropy: logits must be rank-1");
  check(label >= 0 && static_cast<std::size_t>(label) < logits.size(),
        "cross_entropy: label " + std::to_string(label) + " out of range [0," +
            std::to_string(logits.size()) + ")");
  const std::size_t n = logits.size();
  double mx = logits[0];
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, logits[i]);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += std::exp(logits[i] - mx);
  const double loss = mx + std::log(sum) - logits[static_cast<std::size_t>(label)];
  return detail::make_result(
      {1}, {loss}, {logits}, [mx, sum, label, n](detail::TensorNode& o) {
        auto& p = *o.parents[0];
        if (!prep(p)) return;
        const double g = o.grad[0];
        for (std::size_t i = 0; i < n; ++i) {
          double soft = std::exp(p.values[i] - mx) / sum;
          if (i == static_cast<std::size_t>(label)) soft -= 1.0;
          p.grad[i] += g * soft;
        }
      });
}

void sgd_step(const std::vector<Tensor*>& params,
              std::vector<std::vector<double>>& velocities, double lr,
              double momentum) {
  if (velocities.size() != params.size()) {
    velocities.clear();
    for (const Tensor* p : params) velocities.emplace_back(p->size(), 0.0);
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& t = *params[k];
    auto& v = velocities[k];
    auto& g = t.grad();
    auto& w = t.values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      v[i] = momentum * v[i] + g[i];
      w[i] -= lr * v[i];
      g[i] = 0.0;
    }
  }
}

double cosine_lr(double lr0, std::size_t step, std::size_t total_steps) {
  if (total_steps == 0) return lr0;
  const double t = static_cast<double>(step) / static_cast<double>(total_steps);
  return lr0 * (1.0 + std::cos(3.141592653589793 * t)) / 2.0;
}

}  // namespace hvr
