/*
 * Copyright 2026 The protkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "protkit/codec.hpp"
#include "protkit/error.hpp"
#include "protkit/featurise.hpp"
#include "protkit/filter.hpp"
#include "protkit/geometry.hpp"
#include "protkit/gnn.hpp"
#include "protkit/pdb.hpp"
#include "protkit/residue.hpp"
#include "protkit/rng.hpp"
#include "protkit/structure.hpp"
#include "protkit/tasks.hpp"
#include "protkit/tensor_io.hpp"
