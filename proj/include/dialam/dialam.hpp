#pragma once

#include "dialam/candidates.hpp"
#include "dialam/classifier.hpp"
#include "dialam/corpus.hpp"
#include "dialam/dataset.hpp"
#include "dialam/error.hpp"
#include "dialam/features.hpp"
#include "dialam/graph.hpp"
#include "dialam/labels.hpp"
#include "dialam/linear_model.hpp"
#include "dialam/pipeline.hpp"
#include "dialam/remote.hpp"
#include "dialam/rng.hpp"
#include "dialam/scorer.hpp"
#include "dialam/task.hpp"
