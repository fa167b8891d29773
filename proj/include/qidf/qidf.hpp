#pragma once

#include "qidf/errors.hpp"
#include "qidf/corpus_io.hpp"
#include "qidf/tokenizer.hpp"
#include "qidf/idf.hpp"
#include "qidf/index.hpp"
#include "qidf/rescale.hpp"
#include "qidf/dph.hpp"
#include "qidf/index_io.hpp"
#include "qidf/query.hpp"
#include "qidf/predictor.hpp"
#include "qidf/metrics.hpp"
#include "qidf/bootstrap.hpp"
#include "qidf/diagnostics.hpp"
#include "qidf/bench.hpp"
