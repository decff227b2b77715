/*
 * Copyright 2026 The pw2v Authors
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

#include "pw2v/config.hpp"
#include "pw2v/distributed.hpp"
#include "pw2v/error.hpp"
#include "pw2v/eval.hpp"
#include "pw2v/gemm.hpp"
#include "pw2v/kernel_batched.hpp"
#include "pw2v/kernel_scalar.hpp"
#include "pw2v/matrix.hpp"
#include "pw2v/model.hpp"
#include "pw2v/model_io.hpp"
#include "pw2v/negative_table.hpp"
#include "pw2v/partition.hpp"
#include "pw2v/report.hpp"
#include "pw2v/sentence.hpp"
#include "pw2v/sigmoid.hpp"
#include "pw2v/socket_transport.hpp"
#include "pw2v/subsample.hpp"
#include "pw2v/sync.hpp"
#include "pw2v/trainer.hpp"
#include "pw2v/transport.hpp"
#include "pw2v/vocab.hpp"
#include "pw2v/window.hpp"
