#pragma once

#include "turnkit/agreement.hpp"
#include "turnkit/client.hpp"
#include "turnkit/corpus.hpp"
#include "turnkit/csv.hpp"
#include "turnkit/errors.hpp"
#include "turnkit/http_client.hpp"
#include "turnkit/inertia.hpp"
#include "turnkit/judge.hpp"
#include "turnkit/jsonl.hpp"
#include "turnkit/random.hpp"
#include "turnkit/ratio.hpp"
#include "turnkit/rebalance.hpp"
#include "turnkit/report.hpp"
#include "turnkit/simulate.hpp"
#include "turnkit/structured_parser.hpp"
#include "turnkit/unicode.hpp"
#include "turnkit/validator.hpp"
