#pragma once

#include "shape_gate/bench.hpp"
#include "shape_gate/cluster_index.hpp"
#include "shape_gate/config.hpp"
#include "shape_gate/corpus.hpp"
#include "shape_gate/database.hpp"
#include "shape_gate/dog.hpp"
#include "shape_gate/error.hpp"
#include "shape_gate/features.hpp"
#include "shape_gate/image.hpp"
#include "shape_gate/pipeline.hpp"
#include "shape_gate/preprocess.hpp"
#include "shape_gate/scale_windows.hpp"
