//! Pattern grammar for spoken commands.
//!
//! Transcripts are lowercased and every non-alphanumeric character becomes a
//! word break. Rules are tried in a fixed order, first match wins:
//!
//! | kind   | trigger words                                                         |
//! |--------|-----------------------------------------------------------------------|
//! | Stop   | stop, halt, freeze, cancel, abort                                     |
//! | Fetch  | bring, fetch, get, give, deliver, carry, hand, pass, want, have, need |
//! |        | + an item: tea, water, medicine (meds, pills, medication), mug (cup)  |
//! | Patrol | patrol, guard, monitor                                                |
//! | GoTo   | go, come, move, drive, navigate, return + a destination               |
//! | Help   | help, emergency, sos, hurt, fallen, fell                              |
//!
//! A drink item wins over a container, so "a cup of tea" is tea. GoTo
//! destinations: "here" or "me" map to `speaker`, "home", "station", "dock"
//! and "charger" map to `base`, otherwise the word after "to [the]". A bare
//! "come" goes to the speaker.
//!
//! Parameters are read from "with" phrases, `with two sugars and milk`
//! giving `sugar=2, milk=yes`, and from a quantity directly before a known
//! parameter noun (`two sugars`). Plural nouns are singularized by dropping
//! a trailing `s`.

use super::{Intent, IntentKind};
use std::collections::BTreeMap;

const STOP: &[&str] = &["stop", "halt", "freeze", "cancel", "abort"];
const FETCH: &[&str] = &["bring", "fetch", "get", "give", "deliver", "carry", "hand", "pass", "want", "have", "need"];
const PATROL: &[&str] = &["patrol", "guard", "monitor"];
const GOTO: &[&str] = &["go", "come", "move", "drive", "navigate", "return"];
const HELP: &[&str] = &["help", "emergency", "sos", "hurt", "fallen", "fell"];
/// Nouns recognised as parameters even without a leading "with".
const PARAMETER_NOUNS: &[&str] = &["sugar", "milk", "lemon", "honey", "ice", "spoon", "straw"];
const FILLER: &[&str] = &["the", "some", "of", "a", "an", "please", "extra"];

pub(crate) fn normalize(transcript: &str) -> Vec<String> {
    transcript
        .to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect::<String>()
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

fn item_of(word: &str) -> Option<&'static str> {
    match word {
        "tea" => Some("tea"),
        "water" => Some("water"),
        "medicine" | "medicines" | "meds" | "pills" | "medication" => Some("medicine"),
        "mug" | "cup" => Some("mug"),
        _ => None,
    }
}

/// Quantity words and digits to a value token.
pub(crate) fn quantity(word: &str) -> Option<String> {
    let n = match word {
        "no" | "none" | "zero" | "without" => 0,
        "a" | "an" | "one" => 1,
        "two" => 2,
        "three" => 3,
        "four" => 4,
        "five" => 5,
        "six" => 6,
        "seven" => 7,
        "eight" => 8,
        "nine" => 9,
        "ten" => 10,
        w => return w.parse::<u32>().ok().map(|n| n.to_string()),
    };
    Some(n.to_string())
}

pub(crate) fn singular(word: &str) -> String {
    if word.len() > 3 && word.ends_with('s') && !word.ends_with("ss") {
        word[..word.len() - 1].to_string()
    } else {
        word.to_string()
    }
}

fn has(words: &[String], set: &[&str]) -> bool {
    words.iter().any(|w| set.contains(&w.as_str()))
}

pub(crate) fn parameters(words: &[String]) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    let mut i = 0;
    while i < words.len() {
        if words[i] == "with" || (words[i] == "and" && i > 0 && !out.is_empty()) {
            let mut j = i + 1;
            let mut qty = None;
            while j < words.len() {
                if let Some(q) = quantity(&words[j]) {
                    qty = Some(q);
                } else if !FILLER.contains(&words[j].as_str()) {
                    break;
                }
                j += 1;
            }
            if j < words.len() && item_of(&words[j]).is_none() && words[j] != "and" {
                out.insert(singular(&words[j]), qty.unwrap_or_else(|| "yes".to_string()));
                i = j + 1;
                continue;
            }
        } else if i + 1 < words.len() {
            let noun = singular(&words[i + 1]);
            if PARAMETER_NOUNS.contains(&noun.as_str()) {
                if let Some(q) = quantity(&words[i]) {
                    out.entry(noun).or_insert(q);
                    i += 2;
                    continue;
                }
            }
        }
        i += 1;
    }
    out
}

fn destination(words: &[String]) -> Option<String> {
    for (i, w) in words.iter().enumerate() {
        match w.as_str() {
            "here" | "me" => return Some("speaker".into()),
            "home" | "base" | "station" | "dock" | "charger" => return Some("base".into()),
            "to" => {
                let next = words[i + 1..].iter().find(|w| !FILLER.contains(&w.as_str()));
                if let Some(n) = next {
                    return Some(match n.as_str() {
                        "me" => "speaker".into(),
                        "home" | "station" | "dock" | "charger" => "base".into(),
                        other => other.to_string(),
                    });
                }
            }
            _ => {}
        }
    }
    if words.iter().any(|w| w == "come") {
        return Some("speaker".into());
    }
    None
}

pub fn parse(transcript: &str) -> Intent {
    let words = normalize(transcript);
    let matched = |kind, item: Option<&str>, parameters| Intent {
        kind,
        item: item.map(str::to_string),
        parameters,
        confidence: 1.0,
    };
    if has(&words, STOP) {
        return matched(IntentKind::Stop, None, BTreeMap::new());
    }
    if has(&words, FETCH) {
        let items: Vec<&str> = words.iter().filter_map(|w| item_of(w)).collect();
        let item = items.iter().find(|&&i| i != "mug").or(items.first()).copied();
        if let Some(item) = item {
            return matched(IntentKind::Fetch, Some(item), parameters(&words));
        }
    }
    if has(&words, PATROL) {
        return matched(IntentKind::Patrol, None, BTreeMap::new());
    }
    if has(&words, GOTO) {
        if let Some(dest) = destination(&words) {
            return matched(IntentKind::GoTo, None, BTreeMap::from([("destination".to_string(), dest)]));
        }
    }
    if has(&words, HELP) {
        return matched(IntentKind::Help, None, BTreeMap::new());
    }
    Intent::unknown()
}

/// Extracts a value for `key` from an answer such as "two", "2 sugars",
/// "with milk", "none" or "yes".
pub fn parse_parameter_answer(key: &str, answer: &str) -> Option<String> {
    let words = normalize(answer);
    let params = parameters(&words);
    if let Some(v) = params.get(key) {
        return Some(v.clone());
    }
    if let Some(q) = words.iter().find_map(|w| quantity(w)) {
        return Some(q);
    }
    if words.iter().any(|w| w == "yes" || w == "yeah" || w == "sure") {
        return Some("yes".into());
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fetch(item: &str, params: &[(&str, &str)]) -> Intent {
        Intent {
            kind: IntentKind::Fetch,
            item: Some(item.into()),
            parameters: params.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            confidence: 1.0,
        }
    }

    #[test]
    fn basic_commands() {
        assert_eq!(parse("bring me tea"), fetch("tea", &[]));
        assert_eq!(parse("patrol the room").kind, IntentKind::Patrol);
        assert_eq!(parse("sing a song"), Intent::unknown());
    }

    #[test]
    fn case_and_punctuation_do_not_matter() {
        for t in ["Bring me TEA!", "  bring, me tea...", "\"bring me tea?\"", "BRING ME TEA"] {
            assert_eq!(parse(t), fetch("tea", &[]), "{t}");
        }
    }

    #[test]
    fn parameters_from_with_phrases() {
        assert_eq!(parse("bring me tea with two sugars"), fetch("tea", &[("sugar", "2")]));
        assert_eq!(parse("bring me tea with 3 sugars and milk"), fetch("tea", &[("sugar", "3"), ("milk", "yes")]));
        assert_eq!(parse("get me a cup of tea with no sugar"), fetch("tea", &[("sugar", "0")]));
        assert_eq!(parse("tea please, two sugars, could you bring it"), fetch("tea", &[("sugar", "2")]));
    }

    #[test]
    fn other_kinds() {
        assert_eq!(parse("stop right now").kind, IntentKind::Stop);
        assert_eq!(parse("Guard the house").kind, IntentKind::Patrol);
        let g = parse("go to the kitchen");
        assert_eq!(g.kind, IntentKind::GoTo);
        assert_eq!(g.parameters["destination"], "kitchen");
        assert_eq!(parse("come here").parameters["destination"], "speaker");
        assert_eq!(parse("go home").parameters["destination"], "base");
        assert_eq!(parse("help!").kind, IntentKind::Help);
        assert_eq!(parse("I need my pills").item.as_deref(), Some("medicine"));
        assert_eq!(parse("bring me something").kind, IntentKind::Unknown);
    }

    #[test]
    fn answers() {
        assert_eq!(parse_parameter_answer("sugar", "two please").as_deref(), Some("2"));
        assert_eq!(parse_parameter_answer("sugar", "with 1 sugar").as_deref(), Some("1"));
        assert_eq!(parse_parameter_answer("sugar", "none").as_deref(), Some("0"));
        assert_eq!(parse_parameter_answer("milk", "yes").as_deref(), Some("yes"));
        assert_eq!(parse_parameter_answer("sugar", "hmm"), None);
    }
}
