#pragma once

#include "arxtrend/analytics.hpp"
#include "arxtrend/annotate.hpp"
#include "arxtrend/corpus.hpp"
#include "arxtrend/date.hpp"
#include "arxtrend/error.hpp"
#include "arxtrend/harvest.hpp"
#include "arxtrend/http.hpp"
#include "arxtrend/ranking.hpp"
#include "arxtrend/report.hpp"
#include "arxtrend/scoring.hpp"
