#pragma once

#include <nlohmann/json.hpp>

#include "sysrev/entity.hpp"
#include "sysrev/expansion.hpp"
#include "sysrev/query.hpp"
#include "sysrev/refinement.hpp"
#include "sysrev/rerank.hpp"
#include "sysrev/retrieval.hpp"

namespace sysrev {

nlohmann::json to_json(const SentinelArticle& a);
/// Throws ValidationError when the title is missing or empty.
SentinelArticle sentinel_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Article& a);
nlohmann::json to_json(const Entity& e);
nlohmann::json to_json(const TaggedTerm& t);
nlohmann::json to_json(const RefinementTrace& t);
nlohmann::json to_json(const RankedArticle& r);
nlohmann::json to_json(const ExpansionSet& exp);

}  // namespace sysrev
