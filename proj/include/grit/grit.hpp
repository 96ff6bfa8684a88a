#pragma once

#include "grit/bm25.hpp"
#include "grit/error.hpp"
#include "grit/evaluation.hpp"
#include "grit/graph.hpp"
#include "grit/index.hpp"
#include "grit/io.hpp"
#include "grit/querygen.hpp"
#include "grit/rerank.hpp"
#include "grit/stats.hpp"
#include "grit/sweep.hpp"
#include "grit/tokenize.hpp"
#include "grit/types.hpp"
