// Copyright 2026 The oldroyd-spectral Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "oldroyd/grid.hpp"

namespace oldroyd {

using complex = std::complex<double>;

/// Tensor rank of a field. `sym_tensor` stores the dim(dim+1)/2 entries with
/// i <= j; `tensor` stores all dim*dim entries row-major (index i*dim + j).
enum class Rank { scalar, vector, sym_tensor, tensor };

constexpr int component_count(Rank r, int dim) {
  switch (r) {
    case Rank::scalar: return 1;
    case Rank::vector: return dim;
    case Rank::sym_tensor: return dim * (dim + 1) / 2;
    case Rank::tensor: return dim * dim;
  }
  return 0;
}

/// Packed index of entry (i, j) of a symmetric tensor, either order.
constexpr int sym_index(int i, int j, int dim) {
  if (i > j) {
    const int t = i;
    i = j;
    j = t;
  }
  // rows 0..i-1 hold dim, dim-1, ... entries
  return i * dim - i * (i - 1) / 2 + (j - i);
}

/// Weight of packed component c in the Frobenius product: 2 off the diagonal.
inline double frobenius_weight(Rank r, int dim, int c) {
  if (r != Rank::sym_tensor) return 1.0;
  for (int i = 0; i < dim; ++i)
    if (sym_index(i, i, dim) == c) return 1.0;
  return 2.0;
}

inline std::string to_string(Rank r) {
  switch (r) {
    case Rank::scalar: return "scalar";
    case Rank::vector: return "vector";
    case Rank::sym_tensor: return "sym_tensor";
    case Rank::tensor: return "tensor";
  }
  return "?";
}

namespace detail {

/// Component-major storage shared by the spectral and physical field types.
template <class T, class Derived>
class FieldStorage {
 public:
  FieldStorage(const Grid& g, Rank r, std::size_t per_component)
      : grid_(g), rank_(r), stride_(per_component),
        values_(per_component * static_cast<std::size_t>(component_count(r, g.dim)), T{}) {}

  const Grid& grid() const { return grid_; }
  Rank rank() const { return rank_; }
  int components() const { return component_count(rank_, grid_.dim); }
  std::size_t component_size() const { return stride_; }

  std::span<T> component(int c) { return {values_.data() + stride_ * c, stride_}; }
  std::span<const T> component(int c) const { return {values_.data() + stride_ * c, stride_}; }

  /// Symmetric-tensor entry (i, j), or full-tensor entry for Rank::tensor.
  std::span<T> entry(int i, int j) { return component(entry_index(i, j)); }
  std::span<const T> entry(int i, int j) const { return component(entry_index(i, j)); }

  std::vector<T>& values() { return values_; }
  const std::vector<T>& values() const { return values_; }

  Derived& operator+=(const Derived& o) {
    check_compatible(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return self();
  }
  Derived& operator-=(const Derived& o) {
    check_compatible(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return self();
  }
  Derived& operator*=(double a) {
    for (auto& v : values_) v *= a;
    return self();
  }
  /// this += a * x
  template <class S>
  Derived& axpy(S a, const Derived& x) {
    check_compatible(x);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += a * x.values_[i];
    return self();
  }

  friend Derived operator+(Derived a, const Derived& b) { return a += b; }
  friend Derived operator-(Derived a, const Derived& b) { return a -= b; }
  friend Derived operator*(double s, Derived a) { return a *= s; }

  friend bool operator==(const FieldStorage& a, const FieldStorage& b) {
    return a.grid_ == b.grid_ && a.rank_ == b.rank_ && a.values_ == b.values_;
  }

  void check_compatible(const FieldStorage& o) const {
    if (!(o.grid_ == grid_) || o.rank_ != rank_)
      throw std::invalid_argument("field: grid or rank mismatch (" + to_string(rank_) + " vs " +
                                  to_string(o.rank_) + ")");
  }

 private:
  int entry_index(int i, int j) const {
    if (rank_ == Rank::sym_tensor) return sym_index(i, j, grid_.dim);
    if (rank_ == Rank::tensor) return i * grid_.dim + j;
    throw std::logic_error("field: entry() needs a tensor rank");
  }
  Derived& self() { return static_cast<Derived&>(*this); }

  Grid grid_;
  Rank rank_;
  std::size_t stride_;
  std::vector<T> values_;
};

}  // namespace detail

/// Fourier coefficients of a real field, half-spectrum layout (see Grid).
class SpectralField : public detail::FieldStorage<complex, SpectralField> {
 public:
  SpectralField(const Grid& g, Rank r) : FieldStorage(g, r, g.spectral_size()) {}
  using FieldStorage::operator*=;
  SpectralField& operator*=(complex a) {
    for (auto& v : values()) v *= a;
    return *this;
  }
};

/// Collocation values of a real field, row-major over the grid points.
class PhysicalField : public detail::FieldStorage<double, PhysicalField> {
 public:
  PhysicalField(const Grid& g, Rank r) : FieldStorage(g, r, g.real_size()) {}
};

}  // namespace oldroyd
