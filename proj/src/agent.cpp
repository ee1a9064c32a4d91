#include "agentlab/agent.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace agentlab {

void Persona::validate() const {
  if (id.empty()) throw ConfigError("persona id must be non-empty");
  if (prompt_text.empty()) throw ConfigError("persona " + id + " has empty prompt text");
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(const std::string& s) {
  std::string t;
  t.reserve(s.size());
  for (char c : s) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return t;
}

}  // namespace

Persona load_persona_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open persona file " + path.string());
  Persona p;
  std::string line;
  bool in_header = true;
  std::ostringstream body;
  bool first_body_line = true;
  while (std::getline(in, line)) {
    if (in_header) {
      if (trim(line) == "---") {
        in_header = false;
        continue;
      }
      auto colon = line.find(':');
      if (colon == std::string::npos)
        throw ParseError("persona front-matter line without ':' in " + path.string());
      const std::string key = trim(line.substr(0, colon));
      const std::string value = trim(line.substr(colon + 1));
      if (key == "id") p.id = value;
      else if (key == "display_name") p.display_name = value;
      else if (key == "mbti_axis") p.mbti_axis = value;
      else throw ParseError("unknown persona front-matter key '" + key + "' in " + path.string());
    } else {
      if (!first_body_line) body << '\n';
      body << line;
      first_body_line = false;
    }
  }
  if (in_header) throw ParseError("persona file " + path.string() + " has no '---' separator");
  p.prompt_text = trim(body.str());
  p.validate();
  return p;
}

std::map<std::string, Persona> load_personas(const std::filesystem::path& dir) {
  std::map<std::string, Persona> out;
  if (!std::filesystem::is_directory(dir))
    throw IoError("persona directory not found: " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    Persona p = load_persona_file(entry.path());
    if (out.count(p.id)) throw ConfigError("duplicate persona id " + p.id);
    out.emplace(p.id, std::move(p));
  }
  if (out.empty()) throw IoError("no persona files (*.txt) in " + dir.string());
  return out;
}

void AgentMemory::append(int day, const std::string& journal_text,
                         const std::string& reflection_text) {
  journal.emplace_back(day, journal_text);
  reflections.emplace_back(day, reflection_text);
}

void ChatBackendParams::validate() const {
  if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
  if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
}

namespace {

std::string fmt_money(Cents cents) {
  std::ostringstream os;
  const Cents dollars = cents / 100;
  const Cents rem = std::llabs(cents % 100);
  os << (cents < 0 ? "-$" : "$") << std::llabs(dollars) << '.' << (rem < 10 ? "0" : "")
     << rem;
  return os.str();
}

std::string fmt_kwh(WattHours wh) {
  std::ostringstream os;
  os << wh / 1000;
  const int rem = std::abs(wh % 1000);
  if (rem != 0) {
    os << '.';
    std::string frac = std::to_string(rem);
    frac.insert(0, 3 - frac.size(), '0');
    while (!frac.empty() && frac.back() == '0') frac.pop_back();
    os << frac;
  }
  return os.str();
}

}  // namespace

DailyPrompt build_prompt(const Persona& persona, const EnvState& state, Cents price_cents,
                         const AgentMemory& memory, const InterventionSchedule& schedule,
                         const BatteryConfig& cfg) {
  const bool blackout = schedule.contains(state.day);
  EnvState s = state;
  s.in_blackout = blackout;

  DailyPrompt p;
  p.context.day = state.day;
  p.context.horizon = cfg.horizon_days;
  p.context.price_cents = price_cents;
  p.context.soc_wh = state.soc_wh;
  p.context.in_blackout = blackout;
  p.context.feasible = feasible_actions(s, cfg, schedule);
  p.context.persona_id = persona.id;

  std::ostringstream sys;
  sys << persona.prompt_text << "\n\n"
      << "You are taking part in a " << cfg.horizon_days
      << "-day home battery experiment. Your battery stores at most " << fmt_kwh(cfg.capacity_wh)
      << " kWh and never drops below " << fmt_kwh(cfg.floor_wh) << " kWh. Each day you see the"
      << " day's electricity price and may buy (charge) " << fmt_kwh(cfg.unit_wh)
      << " kWh, sell (discharge) " << fmt_kwh(cfg.unit_wh)
      << " kWh, or do nothing. Selling earns the day's price per kWh and buying costs it."
      << " Energy left in the battery after day " << cfg.horizon_days << " is worth nothing.\n"
      << "Power blackouts are possible during the experiment. On a blackout day the household"
      << " is disconnected from the grid: nothing can be bought or sold, and you may instead"
      << " release all stored energy to supply the household.\n\n"
      << "Reply with exactly one JSON object and nothing else, with fields:\n"
      << R"({"thoughts": "...", "action": "charge|discharge|hold|discharge_all", )"
      << R"("reflection": "...", "journal": "..."})";
  p.system_text = sys.str();

  std::ostringstream user;
  user << "Day " << state.day << " of " << cfg.horizon_days << ".\n";
  if (blackout) {
    user << "A blackout is underway: the household is disconnected from the grid today."
         << " No energy can be bought or sold.\n";
  }
  user << "Today's price: " << fmt_money(price_cents) << "/kWh.\n"
       << "Battery level: " << fmt_kwh(state.soc_wh) << " kWh of " << fmt_kwh(cfg.capacity_wh)
       << " kWh.\n"
       << "Feasible actions today: ";
  for (std::size_t i = 0; i < p.context.feasible.size(); ++i) {
    if (i) user << ", ";
    user << to_string(p.context.feasible[i]);
  }
  user << ".\n";

  if (!memory.journal.empty()) {
    user << "\nYour journal so far:\n";
    std::size_t start = 0;
    if (memory.window > 0 && memory.journal.size() > static_cast<std::size_t>(memory.window))
      start = memory.journal.size() - static_cast<std::size_t>(memory.window);
    for (std::size_t i = start; i < memory.journal.size(); ++i)
      user << "- Day " << memory.journal[i].first << ": " << memory.journal[i].second << "\n";
  }
  user << "\nRespond with the JSON object only.";
  p.user_text = user.str();
  return p;
}

namespace {

// First balanced top-level {...}, respecting strings and escapes.
std::string extract_json_object(const std::string& raw) {
  std::size_t start = raw.find('{');
  if (start == std::string::npos) throw ParseError("no JSON object in reply");
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < raw.size(); ++i) {
    const char c = raw[i];
    if (in_string) {
      if (escaped) escaped = false;
      else if (c == '\\') escaped = true;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}') {
      --depth;
      if (depth == 0) return raw.substr(start, i - start + 1);
    }
  }
  throw ParseError("unbalanced JSON object in reply");
}

}  // namespace

AgentResponse parse_response(const std::string& raw, const std::vector<Action>& feasible) {
  const std::string text = extract_json_object(raw);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("reply is not valid JSON: ") + e.what());
  }

  AgentResponse r;
  r.raw = raw;
  for (const char* field : {"thoughts", "action", "reflection", "journal"})
    if (!j.contains(field) || !j[field].is_string())
      throw ParseError(std::string("reply missing string field '") + field + "'");

  r.thoughts = j["thoughts"].get<std::string>();
  r.reflection = j["reflection"].get<std::string>();
  r.journal = j["journal"].get<std::string>();
  if (trim(r.thoughts).empty() || trim(r.reflection).empty() || trim(r.journal).empty())
    throw ParseError("thoughts/reflection/journal must be non-empty");

  r.action = action_from_string(trim(lower(j["action"].get<std::string>())));
  if (std::find(feasible.begin(), feasible.end(), r.action) == feasible.end())
    throw InfeasibleActionError("action " + to_string(r.action) + " not feasible today");
  return r;
}

Agent::Agent(Persona persona, std::shared_ptr<ChatBackend> backend, ChatBackendParams params,
             BatteryConfig cfg, InterventionSchedule schedule)
    : persona_(std::move(persona)),
      backend_(std::move(backend)),
      params_(std::move(params)),
      cfg_(std::move(cfg)),
      schedule_(std::move(schedule)) {
  persona_.validate();
  params_.validate();
  if (!backend_) throw ConfigError("agent needs a backend");
}

Agent::StepResult Agent::act(const EnvState& state, Cents price_cents) {
  DailyPrompt prompt = build_prompt(persona_, state, price_cents, memory_, schedule_, cfg_);

  std::string correction;
  for (int attempt = 0; attempt <= params_.max_retries; ++attempt) {
    DailyPrompt attempt_prompt = prompt;
    if (!correction.empty())
      attempt_prompt.user_text += "\n\nYour previous reply was rejected: " + correction +
                                  " Reply again with exactly one JSON object with fields"
                                  " thoughts, action, reflection, journal.";
    const std::string raw = backend_->complete(attempt_prompt, params_);
    try {
      AgentResponse response = parse_response(raw, prompt.context.feasible);
      StepResult result;
      result.outcome = step(state, response.action, price_cents, cfg_, schedule_);
      result.response = std::move(response);
      result.attempts = attempt + 1;
      memory_.append(state.day, result.response.journal, result.response.reflection);
      return result;
    } catch (const ParseError& e) {
      correction = e.what();
    } catch (const InfeasibleActionError& e) {
      correction = e.what();
    }
  }
  throw ParseError("no valid reply after " + std::to_string(params_.max_retries + 1) +
                   " attempts on day " + std::to_string(state.day) + " (" + correction + ")");
}

}  // namespace agentlab
