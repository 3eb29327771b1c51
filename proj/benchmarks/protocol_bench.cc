// Copyright 2026 The cvdistill Authors
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

#include <benchmark/benchmark.h>

#include "cvdistill/protocol.h"

using namespace cvdistill;

static void BM_run_batch(benchmark::State &state) {
    ProtocolConfig cfg;
    cfg.mode = state.range(0) ? ProtocolMode::kIterative : ProtocolMode::kSingleStage;
    cfg.threshold_stage1 = cfg.threshold_stage2 = 0.3;
    const SourceSet sources{};
    const NoiseSpec noise = NoiseSpec::uniform(0.44);
    uint64_t seed = 0;
    for (auto _ : state) {
        auto d = run_batch(cfg, sources, noise, 10000, seed++);
        benchmark::DoNotOptimize(d);
    }
    state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_run_batch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_record_batch(benchmark::State &state) {
    ProtocolConfig cfg;
    const SourceSet sources{};
    const NoiseSpec noise = NoiseSpec::uniform(0.44);
    uint64_t seed = 0;
    for (auto _ : state) {
        auto r = record_batch(cfg, sources, noise, 10000, seed++);
        benchmark::DoNotOptimize(r);
    }
    state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_record_batch)->Unit(benchmark::kMillisecond);
