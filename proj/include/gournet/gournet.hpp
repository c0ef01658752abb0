/* Copyright 2026 The GourNet-CPP Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include "gournet/checkpoint.hpp"
#include "gournet/config.hpp"
#include "gournet/curves.hpp"
#include "gournet/data.hpp"
#include "gournet/error.hpp"
#include "gournet/image.hpp"
#include "gournet/layers.hpp"
#include "gournet/model.hpp"
#include "gournet/objective.hpp"
#include "gournet/optimize.hpp"
#include "gournet/rng.hpp"
#include "gournet/solver.hpp"
#include "gournet/tensor.hpp"
#include "gournet/trainer.hpp"
