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

// Landmark and mesh types, eye crop geometry and the merge of per-eye
// refinement landmarks into the face mesh.
//
// Coordinates follow the usual face-landmark convention: x and y are
// fractions of the frame width and height with the origin at the upper-left
// corner, z is relative depth on the same scale as x. "Left" and "Right"
// always mean image-left and image-right.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "pupilrig/errors.h"

namespace pupilrig {

inline constexpr Eigen::Index kFaceMeshSize = 468;
inline constexpr Eigen::Index kContourSize = 16;
inline constexpr Eigen::Index kIrisSize = 5;
inline constexpr Eigen::Index kRefinedMeshSize = kFaceMeshSize + 2 * kIrisSize;

// Side of the square eye crop fed to the refinement network, in crop pixels.
inline constexpr double kCropSidePx = 64.0;

template <typename Scalar>
using Landmark3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Landmark2 = Eigen::Matrix<Scalar, 2, 1>;

enum class EyeSide { kLeft = 0, kRight = 1 };

inline const char* to_string(EyeSide side) {
  return side == EyeSide::kLeft ? "left" : "right";
}

// Order of the five iris landmarks in EyeRefinement::iris and in the
// appended refined-mesh block of each eye.
enum class IrisPoint { kCenter = 0, kRight = 1, kUp = 2, kLeft = 3, kDown = 4 };

/// A fixed-size set of 3D landmarks stored column-wise (3 x N).
///
/// The vertex count is part of the type so that a 468-vertex face mesh can
/// never be passed where the 478-vertex refined mesh is expected.
template <typename Scalar, Eigen::Index N>
class LandmarkMesh {
 public:
  using Vertices = Eigen::Matrix<Scalar, 3, Eigen::Dynamic>;
  static constexpr Eigen::Index kSize = N;

  LandmarkMesh() : vertices_(Vertices::Zero(3, N)) {}

  explicit LandmarkMesh(Vertices vertices) : vertices_(std::move(vertices)) {
    if (vertices_.cols() != N) {
      throw ArgumentError("mesh must have exactly " + std::to_string(N) +
                          " vertices, got " +
                          std::to_string(vertices_.cols()));
    }
    if (!vertices_.allFinite()) {
      throw ArgumentError("mesh contains non-finite coordinates");
    }
  }

  static constexpr Eigen::Index size() { return N; }

  const Vertices& vertices() const { return vertices_; }

  auto vertex(Eigen::Index i) const {
    check_index(i);
    return vertices_.col(i);
  }

  // 2D (x, y) position of a vertex.
  Landmark2<Scalar> xy(Eigen::Index i) const {
    check_index(i);
    return vertices_.col(i).template head<2>();
  }

  void set_vertex(Eigen::Index i, const Landmark3<Scalar>& v) {
    check_index(i);
    if (!v.allFinite()) throw ArgumentError("non-finite vertex");
    vertices_.col(i) = v;
  }

  static void check_index(Eigen::Index i) {
    if (i < 0 || i >= N) {
      throw IndexError("vertex index " + std::to_string(i) +
                       " outside mesh of size " + std::to_string(N));
    }
  }

  friend bool operator==(const LandmarkMesh& a, const LandmarkMesh& b) {
    return a.vertices_ == b.vertices_;
  }

 private:
  Vertices vertices_;
};

template <typename Scalar>
using FaceMesh = LandmarkMesh<Scalar, kFaceMeshSize>;
template <typename Scalar>
using RefinedFaceMesh = LandmarkMesh<Scalar, kRefinedMeshSize>;

/// Square crop around an eye. The center is in normalized frame coordinates,
/// the side in source-frame pixels. Crop-local coordinates always span
/// [0, kCropSidePx] regardless of side_px (the crop is resampled to 64x64).
template <typename Scalar>
struct CropRect {
  Scalar center_x = Scalar(0.5);
  Scalar center_y = Scalar(0.5);
  Scalar side_px = Scalar(kCropSidePx);
  Scalar frame_w_px = Scalar(1);
  Scalar frame_h_px = Scalar(1);

  void validate() const {
    if (!(side_px > 0) || !std::isfinite(side_px)) {
      throw ArgumentError("crop side must be positive");
    }
    if (!(frame_w_px > 0) || !(frame_h_px > 0) || !std::isfinite(frame_w_px) ||
        !std::isfinite(frame_h_px)) {
      throw ArgumentError("frame dimensions must be positive");
    }
    if (!std::isfinite(center_x) || !std::isfinite(center_y)) {
      throw ArgumentError("crop center must be finite");
    }
  }

  friend bool operator==(const CropRect&, const CropRect&) = default;
};

/// Refinement network output for one eye, in crop-local pixel coordinates.
template <typename Scalar>
struct EyeRefinement {
  EyeSide side = EyeSide::kLeft;
  Eigen::Matrix<Scalar, 2, kContourSize> contour =
      Eigen::Matrix<Scalar, 2, kContourSize>::Zero();
  // Columns ordered as IrisPoint.
  Eigen::Matrix<Scalar, 2, kIrisSize> iris =
      Eigen::Matrix<Scalar, 2, kIrisSize>::Zero();
  CropRect<Scalar> crop;
};

/// Where one eye lives in the 468-vertex face topology.
///
/// The default contour order starts at the outer corner, runs along the lower
/// lid to the inner corner and returns along the upper lid, so contour[4] is
/// the lower-lid midpoint and contour[12] the upper-lid midpoint.
struct EyeIndices {
  std::array<Eigen::Index, kContourSize> contour{};
  Eigen::Index inner_corner = 0;
  Eigen::Index outer_corner = 0;
  Eigen::Index eye_center = 0;

  friend bool operator==(const EyeIndices&, const EyeIndices&) = default;
};

struct EyeIndexMap {
  EyeIndices left;
  EyeIndices right;

  const EyeIndices& operator[](EyeSide side) const {
    return side == EyeSide::kLeft ? left : right;
  }
  EyeIndices& operator[](EyeSide side) {
    return side == EyeSide::kLeft ? left : right;
  }

  // Throws ConfigError unless every invariant of the index tables holds.
  void validate() const;

  // Eye indices of the 468-vertex MediaPipe face mesh topology. The eye
  // center vertices are the ones the synthetic generator pins to the center
  // of each eye.
  static EyeIndexMap mediapipe_default();

  friend bool operator==(const EyeIndexMap&, const EyeIndexMap&) = default;
};

inline void EyeIndexMap::validate() const {
  for (EyeSide side : {EyeSide::kLeft, EyeSide::kRight}) {
    const EyeIndices& eye = (*this)[side];
    const std::string name = to_string(side);
    auto in_range = [](Eigen::Index i) { return i >= 0 && i < kFaceMeshSize; };
    for (Eigen::Index i : eye.contour) {
      if (!in_range(i)) {
        throw ConfigError(name + " eye contour index " + std::to_string(i) +
                          " is outside the 468-vertex face mesh");
      }
    }
    for (Eigen::Index i : {eye.inner_corner, eye.outer_corner, eye.eye_center}) {
      if (!in_range(i)) {
        throw ConfigError(name + " eye index " + std::to_string(i) +
                          " is outside the 468-vertex face mesh");
      }
    }
    auto sorted = eye.contour;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ConfigError(name + " eye contour indices are not distinct");
    }
    auto is_contour = [&](Eigen::Index i) {
      return std::find(eye.contour.begin(), eye.contour.end(), i) !=
             eye.contour.end();
    };
    if (!is_contour(eye.inner_corner) || !is_contour(eye.outer_corner)) {
      throw ConfigError(name + " eye corners must be contour vertices");
    }
    if (eye.inner_corner == eye.outer_corner) {
      throw ConfigError(name + " eye corners must differ");
    }
  }
}

inline EyeIndexMap EyeIndexMap::mediapipe_default() {
  EyeIndexMap map;
  map.left.contour = {33,  7,   163, 144, 145, 153, 154, 155,
                      133, 173, 157, 158, 159, 160, 161, 246};
  map.left.outer_corner = 33;
  map.left.inner_corner = 133;
  map.left.eye_center = 27;
  map.right.contour = {263, 249, 390, 373, 374, 380, 381, 382,
                       362, 398, 384, 385, 386, 387, 388, 466};
  map.right.outer_corner = 263;
  map.right.inner_corner = 362;
  map.right.eye_center = 257;
  return map;
}

// Refined-mesh index of an iris landmark: left eye at 468..472, right eye at
// 473..477.
inline constexpr Eigen::Index iris_index(EyeSide side, IrisPoint point) {
  return kFaceMeshSize + (side == EyeSide::kLeft ? 0 : kIrisSize) +
         static_cast<Eigen::Index>(point);
}

/// Crop rectangle of side kCropSidePx * scale centered on the eye-center
/// vertex, shifted (never shrunk) to stay inside the frame. A crop larger than
/// the frame along an axis is centered on that axis.
template <typename Scalar>
CropRect<Scalar> eye_roi(const FaceMesh<Scalar>& mesh, EyeSide side,
                         const EyeIndexMap& index_map, long frame_w_px,
                         long frame_h_px, Scalar scale = Scalar(1)) {
  if (frame_w_px <= 0 || frame_h_px <= 0) {
    throw ArgumentError("frame dimensions must be positive");
  }
  if (!(scale > 0) || !std::isfinite(scale)) {
    throw ArgumentError("crop scale must be positive");
  }
  const Eigen::Index center_index = index_map[side].eye_center;
  if (center_index < 0 || center_index >= kFaceMeshSize) {
    throw IndexError("eye center index " + std::to_string(center_index) +
                     " outside face mesh");
  }
  const Landmark2<Scalar> center = mesh.xy(center_index);

  CropRect<Scalar> crop;
  crop.side_px = Scalar(kCropSidePx) * scale;
  crop.frame_w_px = Scalar(frame_w_px);
  crop.frame_h_px = Scalar(frame_h_px);

  auto clamp_axis = [&](Scalar c, Scalar frame_px) {
    const Scalar half = crop.side_px / (Scalar(2) * frame_px);
    if (half >= Scalar(0.5)) return Scalar(0.5);
    return std::clamp(c, half, Scalar(1) - half);
  };
  crop.center_x = clamp_axis(center.x(), crop.frame_w_px);
  crop.center_y = clamp_axis(center.y(), crop.frame_h_px);
  return crop;
}

// Crop-local pixel coordinates -> normalized frame coordinates.
template <typename Scalar>
Landmark2<Scalar> crop_to_frame(const CropRect<Scalar>& crop,
                                const Landmark2<Scalar>& p) {
  const Scalar unit = Scalar(1) / Scalar(kCropSidePx);
  return {crop.center_x + (p.x() * unit - Scalar(0.5)) * crop.side_px /
                              crop.frame_w_px,
          crop.center_y + (p.y() * unit - Scalar(0.5)) * crop.side_px /
                              crop.frame_h_px};
}

// Normalized frame coordinates -> crop-local pixel coordinates.
template <typename Scalar>
Landmark2<Scalar> frame_to_crop(const CropRect<Scalar>& crop,
                                const Landmark2<Scalar>& q) {
  return {((q.x() - crop.center_x) * crop.frame_w_px / crop.side_px +
           Scalar(0.5)) *
              Scalar(kCropSidePx),
          ((q.y() - crop.center_y) * crop.frame_h_px / crop.side_px +
           Scalar(0.5)) *
              Scalar(kCropSidePx)};
}

/// Builds the 478-vertex refined mesh.
///
/// Contour vertices take x, y from the refinement and keep their z. The five
/// iris points of each eye are appended with z set to the mean z of that eye's
/// two corners. Every other vertex is copied unchanged.
template <typename Scalar>
RefinedFaceMesh<Scalar> merge_refinement(const FaceMesh<Scalar>& mesh,
                                         const EyeRefinement<Scalar>& left,
                                         const EyeRefinement<Scalar>& right,
                                         const EyeIndexMap& index_map) {
  index_map.validate();
  if (left.side != EyeSide::kLeft || right.side != EyeSide::kRight) {
    throw ArgumentError("refinements must be passed as (left, right)");
  }

  typename RefinedFaceMesh<Scalar>::Vertices out(3, kRefinedMeshSize);
  out.leftCols(kFaceMeshSize) = mesh.vertices();

  for (const EyeRefinement<Scalar>* eye : {&left, &right}) {
    eye->crop.validate();
    const EyeIndices& indices = index_map[eye->side];
    for (Eigen::Index k = 0; k < kContourSize; ++k) {
      const Eigen::Index target = indices.contour[static_cast<std::size_t>(k)];
      out.col(target).template head<2>() =
          crop_to_frame<Scalar>(eye->crop, eye->contour.col(k));
    }
    const Scalar pupil_z =
        (mesh.vertices()(2, indices.inner_corner) +
         mesh.vertices()(2, indices.outer_corner)) /
        Scalar(2);
    for (Eigen::Index k = 0; k < kIrisSize; ++k) {
      const Eigen::Index target =
          iris_index(eye->side, static_cast<IrisPoint>(k));
      out.col(target).template head<2>() =
          crop_to_frame<Scalar>(eye->crop, eye->iris.col(k));
      out(2, target) = pupil_z;
    }
  }
  return RefinedFaceMesh<Scalar>(std::move(out));
}

// Drops the appended iris block of a refined mesh.
template <typename Scalar>
FaceMesh<Scalar> face_part(const RefinedFaceMesh<Scalar>& refined) {
  return FaceMesh<Scalar>(refined.vertices().leftCols(kFaceMeshSize));
}

}  // namespace pupilrig
