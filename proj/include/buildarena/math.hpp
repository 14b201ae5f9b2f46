// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Geometry>

namespace buildarena {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

using BlockId = int;
using ConnectorId = int;

}  // namespace buildarena
