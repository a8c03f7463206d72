#pragma once

#include "ist/spec_io.hpp"
#include "json_util.hpp"

namespace ist::detail {

Json value_to_json(const ValueRef& v);
ValueRef value_from_json(const Json& j, const std::string& path, const SchemaContext& ctx);

Json mask_to_json(const EncodingMask& mask);
EncodingMask mask_from_json(const Json& j, const std::string& path, const SchemaContext& ctx);

Json realized_to_json(const RealizedValues& values);
RealizedValues realized_from_json(const Json& j, const std::string& path, const SchemaContext& ctx);

Json record_to_json(const OutputRecord& r);
OutputRecord record_from_json(const Json& j, const std::string& path, const SchemaContext& ctx);

DimensionId id_from_json(const Json& j, const std::string& path, const SchemaContext& ctx);

}  // namespace ist::detail
