#pragma once

#include "optf/assumptions.hpp"
#include "optf/domain.hpp"
#include "optf/error.hpp"
#include "optf/ingest.hpp"
#include "optf/report.hpp"
#include "optf/solver.hpp"
