#include <foothold/ground_log.h>

#include <cmath>
#include <cstdio>

#include <foothold/error.h>

namespace foothold
{

namespace
{

bool samePolygon(const FootholdPolygon & a, const FootholdPolygon & b)
{
  return a.vertices() == b.vertices();
}

} // namespace

void GroundReferenceLog::append(LogRow row, const FootholdPolygon & support)
{
  if(!rows_.empty() && !(row.t > rows_.back().t))
  {
    throw Error(ErrorCode::InvalidArgument, "log rows must have increasing time");
  }
  const double timeConstant = std::sqrt(params_.height / params_.gravity);
  row.icp = row.com + row.comVelocity * timeConstant;
  if(supports_.empty() || !samePolygon(supports_.back().polygon, support))
  {
    supports_.push_back({row.t, support});
  }
  row.support = supports_.size() - 1;
  rows_.push_back(std::move(row));
}

void GroundReferenceLog::writeCsv(std::ostream & out, double period) const
{
  out << "t,icp_x,icp_y,icp_ref_x,icp_ref_y,cop_x,cop_y,cmp_x,cmp_y,phase,weight\n";
  long next = 0;
  char line[512];
  for(const auto & r : rows_)
  {
    if(r.t + 1e-9 < next * period)
    {
      continue;
    }
    next = static_cast<long>(std::floor((r.t + 1e-9) / period)) + 1;
    std::snprintf(line, sizeof(line), "%.4f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%s,%.6f\n", r.t, r.icp.x(),
                  r.icp.y(), r.icpRef.x(), r.icpRef.y(), r.cop.x(), r.cop.y(), r.cmp.x(), r.cmp.y(), toString(r.phase),
                  r.weight);
    out << line;
  }
}

nlohmann::json polygonJson(const FootholdPolygon & p)
{
  nlohmann::json j;
  j["frame"] = p.frame();
  j["vertices"] = nlohmann::json::array();
  for(const auto & v : p.vertices())
  {
    j["vertices"].push_back({v.x(), v.y()});
  }
  return j;
}

nlohmann::json GroundReferenceLog::supportsJson() const
{
  nlohmann::json a = nlohmann::json::array();
  for(const auto & s : supports_)
  {
    a.push_back({{"t", s.t}, {"polygon", polygonJson(s.polygon)}});
  }
  return a;
}

} // namespace foothold
