// Copyright 2026 The kgalign Authors.
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

#include "kgalign/common.hpp"
#include "kgalign/evaluator.hpp"
#include "kgalign/features.hpp"
#include "kgalign/fusion.hpp"
#include "kgalign/kg_data.hpp"
#include "kgalign/linalg.hpp"
#include "kgalign/models.hpp"
#include "kgalign/synth.hpp"
#include "kgalign/text_interface.hpp"
#include "kgalign/trainer.hpp"
