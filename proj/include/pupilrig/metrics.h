// Copyright 2026 The PupilRig Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Landmark error metrics normalized by the inter-eye distance (IED).

#pragma once

#include <Eigen/Dense>

#include <cmath>

#include "pupilrig/errors.h"
#include "pupilrig/mesh.h"

namespace pupilrig {

// 2 x N set of (x, y) landmarks.
template <typename Scalar>
using LandmarkSet = Eigen::Matrix<Scalar, 2, Eigen::Dynamic>;

/// Distance between the centroids of the two eye contours.
template <typename Scalar>
Scalar inter_eye_distance(const RefinedFaceMesh<Scalar>& mesh,
                          const EyeIndexMap& index_map) {
  auto centroid = [&](const EyeIndices& eye) {
    Landmark2<Scalar> sum = Landmark2<Scalar>::Zero();
    for (Eigen::Index i : eye.contour) sum += mesh.xy(i);
    return Landmark2<Scalar>(sum / Scalar(kContourSize));
  };
  const Scalar ied = (centroid(index_map.right) - centroid(index_map.left)).norm();
  if (!(ied >= Scalar(1e-9))) {
    throw GeometryError("inter-eye distance below 1e-9");
  }
  return ied;
}

/// Both eye contours followed by both iris sets: the 42 landmarks produced by
/// the eye refinement stage, as a 2 x 42 set.
template <typename Scalar>
LandmarkSet<Scalar> eye_landmarks(const RefinedFaceMesh<Scalar>& mesh,
                                  const EyeIndexMap& index_map) {
  LandmarkSet<Scalar> out(2, 2 * (kContourSize + kIrisSize));
  Eigen::Index col = 0;
  for (EyeSide side : {EyeSide::kLeft, EyeSide::kRight}) {
    for (Eigen::Index i : index_map[side].contour) out.col(col++) = mesh.xy(i);
  }
  for (Eigen::Index i = kFaceMeshSize; i < kRefinedMeshSize; ++i) {
    out.col(col++) = mesh.xy(i);
  }
  return out;
}

namespace detail {

template <typename DerivedA, typename DerivedB, typename Scalar>
void check_landmark_pair(const Eigen::MatrixBase<DerivedA>& pred,
                         const Eigen::MatrixBase<DerivedB>& gt, Scalar ied) {
  if (pred.rows() != 2 || gt.rows() != 2) {
    throw ArgumentError("landmark sets must be 2 x N");
  }
  if (pred.cols() != gt.cols()) {
    throw ArgumentError("landmark sets differ in length");
  }
  if (pred.cols() == 0) throw ArgumentError("landmark sets are empty");
  if (!(ied > 0) || !std::isfinite(ied)) {
    throw ArgumentError("inter-eye distance must be positive");
  }
  if (!pred.allFinite() || !gt.allFinite()) {
    throw ArgumentError("landmark sets must be finite");
  }
}

}  // namespace detail

// Mean squared point distance divided by ied^2.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar mse_ied(const Eigen::MatrixBase<DerivedA>& pred,
                                  const Eigen::MatrixBase<DerivedB>& gt,
                                  typename DerivedA::Scalar ied) {
  detail::check_landmark_pair(pred, gt, ied);
  return (pred - gt).colwise().squaredNorm().mean() / (ied * ied);
}

// Mean point distance divided by ied.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar mad_ied(const Eigen::MatrixBase<DerivedA>& pred,
                                  const Eigen::MatrixBase<DerivedB>& gt,
                                  typename DerivedA::Scalar ied) {
  detail::check_landmark_pair(pred, gt, ied);
  return (pred - gt).colwise().norm().mean() / ied;
}

}  // namespace pupilrig
