// Copyright 2026 The bml Authors
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


// Umbrella header.

#pragma once

#include <bml/boosting.hpp>
#include <bml/config.hpp>
#include <bml/core.hpp>
#include <bml/error.hpp>
#include <bml/generators.hpp>
#include <bml/io.hpp>
#include <bml/memory_model.hpp>
#include <bml/pipelines.hpp>
#include <bml/random.hpp>
#include <bml/reductions.hpp>
#include <bml/sq_dimension.hpp>
#include <bml/sq_oracle.hpp>
#include <bml/stream.hpp>
#include <bml/suite.hpp>
