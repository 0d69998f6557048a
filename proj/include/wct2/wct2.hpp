/*
 * Copyright 2026 The WCT2 Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include "wct2/errors.hpp"
#include "wct2/image_io.hpp"
#include "wct2/linalg.hpp"
#include "wct2/metrics.hpp"
#include "wct2/network.hpp"
#include "wct2/pipeline.hpp"
#include "wct2/stylize.hpp"
#include "wct2/tensor.hpp"
#include "wct2/verify.hpp"
#include "wct2/wavelet.hpp"
#include "wct2/weights.hpp"
