use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const ONSETS: &[&str] = &[
    "b", "c", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p", "qu", "r", "s", "t", "v", "w", "x",
    "y", "z", "bl", "br", "ch", "cl", "cr", "dr", "fl", "fr", "gl", "gr", "kr", "ph", "pl", "pr",
    "sc", "sh", "sk", "sl", "sm", "sn", "sp", "st", "sw", "th", "tr", "tw", "wh", "wr", "zh",
];
const NUCLEI: &[&str] = &[
    "a", "e", "i", "o", "u", "y", "ai", "au", "ea", "ee", "ei", "ie", "io", "oa", "oo", "ou", "ue",
    "ui",
];
const CODAS: &[&str] = &[
    "", "", "", "b", "ck", "d", "ft", "g", "k", "l", "ld", "lk", "m", "mp", "n", "nd", "ng", "nk",
    "nt", "p", "r", "rd", "rk", "rm", "rn", "rt", "s", "sk", "sp", "st", "t", "th", "v", "x", "z",
];

const DEVANAGARI_CONSONANTS: &[char] = &[
    'क', 'ख', 'ग', 'घ', 'च', 'छ', 'ज', 'झ', 'ट', 'ठ', 'ड', 'ढ', 'ण', 'त', 'थ', 'द', 'ध', 'न', 'प',
    'फ', 'ब', 'भ', 'म', 'य', 'र', 'ल', 'व', 'श', 'ष', 'स', 'ह',
];
const DEVANAGARI_SIGNS: &[Option<char>] = &[
    None,
    None,
    Some('ा'),
    Some('ि'),
    Some('ी'),
    Some('ु'),
    Some('ू'),
    Some('े'),
    Some('ै'),
    Some('ो'),
    Some('ौ'),
    Some('ं'),
];

const LATIN_LETTERS: &[char] = &[
    'a', 'b', 'c', 'd', 'e', 'f', 'g', 'h', 'i', 'j', 'k', 'l', 'm', 'n', 'o', 'p', 'q', 'r', 's',
    't', 'u', 'v', 'w', 'x', 'y', 'z',
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Script {
    Latin,
    Devanagari,
}

fn latin_word(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(2..=3);
    let mut w = String::new();
    for _ in 0..n {
        w.push_str(ONSETS.choose(rng).unwrap());
        w.push_str(NUCLEI.choose(rng).unwrap());
        w.push_str(CODAS.choose(rng).unwrap());
    }
    w
}

fn devanagari_word(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(2..=4);
    let mut w = String::new();
    for _ in 0..n {
        w.push(*DEVANAGARI_CONSONANTS.choose(rng).unwrap());
        if let Some(s) = DEVANAGARI_SIGNS.choose(rng).unwrap() {
            w.push(*s);
        }
    }
    w
}

/// Distinct pseudo-words, none equal to a token in `reserved`.
pub(crate) fn vocabulary(
    rng: &mut ChaCha8Rng,
    script: Script,
    size: usize,
    reserved: &BTreeSet<String>,
) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(size);
    let mut attempts = 0usize;
    while out.len() < size && attempts < size * 50 {
        attempts += 1;
        let w = match script {
            Script::Latin => latin_word(rng),
            Script::Devanagari => devanagari_word(rng),
        };
        if !reserved.contains(&w) && seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

/// Words drawn without repetition.
pub(crate) fn sample_words(rng: &mut ChaCha8Rng, vocab: &[String], n: usize) -> Vec<String> {
    vocab
        .choose_multiple(rng, n.min(vocab.len()))
        .cloned()
        .collect()
}

/// Base text plus char-index ranges that mutation must leave intact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Template {
    pub script: Script,
    pub text: String,
    pub protected: Vec<(usize, usize)>,
}

impl Template {
    /// Joins `words`, inserting each phrase of `inserts` at a random word
    /// position and protecting it.
    pub fn build(
        rng: &mut ChaCha8Rng,
        script: Script,
        mut words: Vec<String>,
        inserts: &[String],
    ) -> Self {
        let mut marked: Vec<(String, bool)> = words.drain(..).map(|w| (w, false)).collect();
        for ins in inserts {
            let at = rng.random_range(0..=marked.len());
            marked.insert(at, (ins.clone(), true));
        }
        let mut text = String::new();
        let mut protected = Vec::new();
        let mut pos = 0usize;
        for (i, (w, prot)) in marked.iter().enumerate() {
            if i > 0 {
                text.push(' ');
                pos += 1;
            }
            let len = w.chars().count();
            if *prot {
                protected.push((pos, pos + len));
            }
            text.push_str(w);
            pos += len;
        }
        Self {
            script,
            text,
            protected,
        }
    }

    /// Substitutes, deletes or inserts letters at `rate` per unprotected,
    /// non-space character.
    pub fn mutate(&self, rng: &mut ChaCha8Rng, rate: f64) -> String {
        let mut out = String::with_capacity(self.text.len() + 8);
        for (i, c) in self.text.chars().enumerate() {
            let guarded = c == ' ' || self.protected.iter().any(|&(a, b)| i >= a && i < b);
            if guarded || !rng.random_bool(rate) {
                out.push(c);
                continue;
            }
            match rng.random_range(0..5) {
                0..=2 => out.push(self.letter(rng)),
                3 => {}
                _ => {
                    out.push(c);
                    out.push(self.letter(rng));
                }
            }
        }
        out
    }

    fn letter(&self, rng: &mut ChaCha8Rng) -> char {
        match self.script {
            Script::Latin => *LATIN_LETTERS.choose(rng).unwrap(),
            Script::Devanagari => *DEVANAGARI_CONSONANTS.choose(rng).unwrap(),
        }
    }
}

pub(crate) fn random_token(rng: &mut ChaCha8Rng, len: usize) -> String {
    const ALNUM: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
    (0..len)
        .map(|_| *ALNUM.choose(rng).unwrap() as char)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn vocabulary_is_distinct_and_avoids_reserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let probe = vocabulary(&mut rng, Script::Latin, 50, &BTreeSet::new());
        let reserved: BTreeSet<String> = probe.iter().take(10).cloned().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = vocabulary(&mut rng, Script::Latin, 500, &reserved);
        assert_eq!(v.len(), 500);
        assert_eq!(v.iter().collect::<BTreeSet<_>>().len(), 500);
        assert!(v.iter().all(|w| !reserved.contains(w)));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = vocabulary(&mut rng, Script::Devanagari, 200, &BTreeSet::new());
        assert!(h
            .iter()
            .all(|w| w.chars().all(|c| ('\u{0900}'..='\u{097f}').contains(&c))));
    }

    #[test]
    fn protected_spans_survive_mutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let words: Vec<String> = ["alpha", "bravo", "charlie", "delta"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let t = Template::build(&mut rng, Script::Latin, words, &["boycott".to_string()]);
        assert!(t.text.contains("boycott"));
        for _ in 0..50 {
            let m = t.mutate(&mut rng, 0.9);
            assert!(m.contains("boycott"), "{m}");
        }
        assert_eq!(t.mutate(&mut rng, 0.0), t.text);
    }
}
