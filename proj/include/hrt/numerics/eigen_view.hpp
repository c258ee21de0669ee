// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

#include <Eigen/Core>

namespace hrt::ev {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Map = Eigen::Map<RowMat>;
using ConstMap = Eigen::Map<const RowMat>;
using StridedMap = Eigen::Map<RowMat, 0, Eigen::OuterStride<>>;
using ConstStridedMap = Eigen::Map<const RowMat, 0, Eigen::OuterStride<>>;
using RowVec = Eigen::Map<Eigen::RowVectorXd>;
using ConstRowVec = Eigen::Map<const Eigen::RowVectorXd>;

inline Map view(double* p, std::size_t r, std::size_t c) {
  return Map(p, static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}
inline ConstMap view(const double* p, std::size_t r, std::size_t c) {
  return ConstMap(p, static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}
// Column block [.., c) of a row-major buffer whose rows are `stride` apart.
inline StridedMap view(double* p, std::size_t r, std::size_t c, std::size_t stride) {
  return StridedMap(p, static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c),
                    Eigen::OuterStride<>(static_cast<Eigen::Index>(stride)));
}
inline ConstStridedMap view(const double* p, std::size_t r, std::size_t c, std::size_t stride) {
  return ConstStridedMap(p, static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c),
                         Eigen::OuterStride<>(static_cast<Eigen::Index>(stride)));
}
inline RowVec row(double* p, std::size_t n) { return RowVec(p, static_cast<Eigen::Index>(n)); }
inline ConstRowVec row(const double* p, std::size_t n) { return ConstRowVec(p, static_cast<Eigen::Index>(n)); }

}  // namespace hrt::ev
