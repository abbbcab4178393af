#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "aceformer/tensor.hpp"

namespace aceformer::ad {

inline constexpr double kLayerNormEps = 1e-5;

// (m,k) x (k,n) -> (m,n)
Tensor matmul(const Tensor& a, const Tensor& b);

// element-wise, identical shapes
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);

// (m,n) + (n,) broadcast over rows
Tensor add_rowvec(const Tensor& a, const Tensor& bias);

Tensor scale(const Tensor& a, double c);

// input (L, c_in), kernel (k, c_in, c_out), odd k, zero-padded to keep L
Tensor conv1d(const Tensor& x, const Tensor& kernel);

// (h, w) -> (h/kh, w/kw); window equals stride; gradient goes to the first
// occurrence of each window maximum
Tensor maxpool2d(const Tensor& x, std::size_t kh, std::size_t kw);

// stable softmax along the last axis of a 1-D or 2-D tensor
Tensor softmax(const Tensor& x);

Tensor elu(const Tensor& x);

// normalize the last axis, then scale/shift with gamma/beta of that width
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta);

// mean of squared differences over all elements -> scalar
Tensor mse_loss(const Tensor& pred, const Tensor& target);

// rows [r0,r1) and columns [c0,c1) of a 2-D tensor
Tensor slice(const Tensor& x, std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1);

Tensor concat_rows(const Tensor& a, const Tensor& b);
Tensor concat_cols(const Tensor& a, const Tensor& b);

Tensor transpose2d(const Tensor& x);

// axis 0: column means -> (w,); axis 1: row means -> (h,)
Tensor mean_axis(const Tensor& x, int axis);

Tensor sum_all(const Tensor& x);

Tensor reshape(const Tensor& x, std::vector<std::size_t> shape);

// pick rows of a 2-D tensor; duplicate indices accumulate on backward
Tensor gather_rows(const Tensor& x, std::vector<std::size_t> indices);

// place rows into an (m, n) zero tensor at the given row indices
Tensor scatter_rows(const Tensor& rows, std::vector<std::size_t> indices, std::size_t m);

// tile a (n,) vector into (m, n)
Tensor repeat_row(const Tensor& v, std::size_t m);

// forward applies fn to the flattened data (size-preserving); backward is the
// identity, so the transform is invisible to the gradient
Tensor straight_through(const Tensor& x,
                        const std::function<std::vector<double>(const std::vector<double>&)>& fn);

}  // namespace aceformer::ad
