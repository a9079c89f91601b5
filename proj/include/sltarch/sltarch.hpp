// Copyright Contributors to the SLTarch Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sltarch/common.hpp"
#include "sltarch/image.hpp"
#include "sltarch/scene.hpp"
#include "sltarch/scene_io.hpp"
#include "sltarch/simarch.hpp"
#include "sltarch/sltree.hpp"
#include "sltarch/sltree_io.hpp"
#include "sltarch/splat.hpp"
#include "sltarch/traversal.hpp"
