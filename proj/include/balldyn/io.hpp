#pragma once

#include <json.hpp>

#include "balldyn/verify.hpp"

// JSON encodings of maps, families, points and reports.  Complex numbers are
// [re, im] pairs, matrices are arrays of rows.
namespace balldyn::io {

using json = nlohmann::json;

class ParseError : public Error {
 public:
  using Error::Error;
};

json to_json(const MapDescription& f);
MapDescription map_from_json(const json& j);

json to_json(const CommutingFamily& F);
// Maps are read and the commuting certificate is recomputed.
CommutingFamily family_from_json(const json& j, std::uint64_t seed = 0);

json to_json(const DomainPoint& x);
DomainPoint point_from_json(const json& j);
json to_json(const BoundaryPoint& p);

json to_json(const Certificate& c);
json to_json(const LimitEstimate& e);
json to_json(const Classification& c);
json to_json(const TypeEstimate& t);
json to_json(const NormalFormAutomorphism& t);
json to_json(const Intertwiner& l);
json to_json(const SemiModel& s);
json to_json(const MapProfile& p);
MapProfile profile_from_json(const json& j);
json to_json(const PairVerdict& v);
json to_json(const DwVerdict& v);
json to_json(const GeodesicRestriction& r);
json to_json(const UnivalenceReport& r);
json to_json(const verify::PropertyResult& p);
json to_json(const verify::SuiteReport& r);

json read_file(const std::string& path);

}  // namespace balldyn::io
