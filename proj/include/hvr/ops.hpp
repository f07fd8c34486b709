#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "hvr/rng.hpp"
#include "hvr/tensor.hpp"

namespace hvr {

// Differentiable op set. Every op defines forward here and records a backward
// that accumulates into the grad buffers of parents that require gradients.

// Concatenate along the channel (last) dimension; all other dims must match.
Tensor concat_channels(const Tensor& a, const Tensor& b);

// 3D convolution. input (X,Y,Z,Ci), weights (kx,ky,kz,Ci,Co), zero padding.
// Output spatial extent: (X + 2*pad - k) / stride + 1 per axis.
Tensor conv3d(const Tensor& input, const Tensor& weights,
              std::array<int, 3> stride, std::array<int, 3> pad);

// x: (Ci), weights: (Ci,Co) -> (Co). No bias.
Tensor linear(const Tensor& x, const Tensor& weights);

Tensor relu(const Tensor& x);

// (S1,...,Sk,C) -> (C); mean over all spatial cells.
Tensor avg_pool_spatial(const Tensor& x);

// x: (S1,...,Sk,C), w: (S1,...,Sk) -> (C); sum_cells w[cell] * x[cell,:].
// Differentiable w.r.t. both arguments.
Tensor weighted_avg_pool(const Tensor& x, const Tensor& w);

// Joint exp-normalization over every entry (max-subtracted). The result is a
// single probability distribution regardless of rank.
Tensor softmax_grid(const Tensor& logits);

// log(max(x, eps)) elementwise.
Tensor log_clamp(const Tensor& x, double eps);

Tensor add(const Tensor& a, const Tensor& b);
Tensor add_const(const Tensor& x, const std::vector<double>& c);
Tensor scale(const Tensor& x, double s);
Tensor reshape(const Tensor& x, Shape dims);

// x: (C) -> (S1,...,Sk,C): the vector replicated over every spatial cell.
Tensor broadcast_spatial(const Tensor& x, Shape spatial);

// Differentiable sample from the distribution r via the Gumbel-Softmax
// reparameterization: softmax((log(max(r,1e-12)) + G) / theta) with G ~ i.i.d.
// Gumbel(0,1). Gradients flow through r; the noise is a constant.
Tensor gumbel_softmax(const Tensor& r, double theta, Rng& rng);
Tensor gumbel_softmax_with_noise(const Tensor& r, double theta,
                                 const std::vector<double>& noise);

// KL(p||q) = sum p * log(max(p,eps)/max(q,eps)), eps = 1e-12. q is treated as
// a constant; the gradient flows to p only.
Tensor kl_divergence(const Tensor& p, const Tensor& q);

// -log softmax(logits)[label]; logits rank-1 over classes.
Tensor cross_entropy(const Tensor& logits, int label);

// Classical momentum update over a parameter set: v = mu*v + g; w -= lr*v.
// Gradient buffers are zeroed afterwards. velocities are created on first use.
void sgd_step(const std::vector<Tensor*>& params,
              std::vector<std::vector<double>>& velocities, double lr,
              double momentum);

// Cosine decay: lr0 * (1 + cos(pi*t/total)) / 2.
double cosine_lr(double lr0, std::size_t step, std::size_t total_steps);

}  // namespace hvr
