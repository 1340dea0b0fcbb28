#pragma once

#include "sveval/classifiers.hpp"
#include "sveval/csv.hpp"
#include "sveval/encoding.hpp"
#include "sveval/errors.hpp"
#include "sveval/estimation.hpp"
#include "sveval/experiment_io.hpp"
#include "sveval/harness.hpp"
#include "sveval/ingest.hpp"
#include "sveval/logistic.hpp"
#include "sveval/model_io.hpp"
#include "sveval/parallel.hpp"
#include "sveval/population.hpp"
#include "sveval/report.hpp"
#include "sveval/rng.hpp"
#include "sveval/roc.hpp"
#include "sveval/sampling.hpp"
#include "sveval/tree.hpp"
#include "sveval/types.hpp"
#include "sveval/upsample.hpp"
