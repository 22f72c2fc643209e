//! Synthetic English/romanized-Hindi code-mix utterances for seven
//! task-oriented intents.
//!
//! Utterances are drawn from per-intent templates, filled from slot pools
//! that deliberately overlap between intents (songs and artists between the
//! music intents, titles between the search intents), then perturbed with
//! seeded spelling variants, fillers, casing and punctuation noise.

use crate::numerics::RngStream;

use super::dataset::{LabeledDataset, Record, Utterance};

pub const INTENTS: [&str; 7] = [
    "SearchCreativeWork",
    "GetWeather",
    "BookRestaurant",
    "PlayMusic",
    "AddToPlaylist",
    "RateBook",
    "SearchScreeningEvent",
];

const ARTISTS: &[&str] = &[
    "arijit singh", "shreya ghoshal", "ar rahman", "badshah", "lata mangeshkar",
    "kishore kumar", "taylor swift", "ed sheeran", "atif aslam", "neha kakkar",
    "sonu nigam", "coldplay", "diljit dosanjh", "the weeknd",
];
const SONGS: &[&str] = &[
    "tum hi ho", "kesariya", "shape of you", "chaiyya chaiyya", "kal ho naa ho",
    "blinding lights", "lag ja gale", "tujhe dekha to", "perfect", "yellow",
    "channa mereya", "apna time aayega", "kun faya kun",
];
const PLAYLISTS: &[&str] = &[
    "workout", "road trip", "chill", "party", "bollywood hits", "sad songs",
    "morning", "gym", "90s", "romantic",
];
const GENRES: &[&str] = &["sufi", "punjabi", "jazz", "rock", "lofi", "classical", "ghazal", "pop"];
const SERVICES: &[&str] = &["spotify", "gaana", "youtube", "jiosaavn", "wynk"];
const CITIES: &[&str] = &[
    "mumbai", "delhi", "pune", "bangalore", "chennai", "kolkata", "jaipur",
    "lucknow", "goa", "hyderabad", "shimla", "indore",
];
const TIMES: &[&str] = &[
    "aaj", "kal", "parso", "weekend pe", "shaam ko", "subah", "raat ko",
    "next week", "monday", "abhi",
];
const CUISINES: &[&str] = &[
    "chinese", "italian", "south indian", "punjabi", "mughlai", "thai", "gujarati", "seafood",
];
const RESTAURANTS: &[&str] = &[
    "bademiya", "the bombay canteen", "karim's", "saravana bhavan", "mainland china",
    "barbeque nation", "social", "haldiram's",
];
const BOOKS: &[&str] = &[
    "the secret", "godaan", "the white tiger", "gitanjali", "wings of fire",
    "the alchemist", "malgudi days", "five point someone", "half girlfriend",
];
const MOVIES: &[&str] = &[
    "sholay", "dangal", "pathaan", "jawan", "3 idiots", "lagaan", "oppenheimer",
    "inception", "rrr", "gully boy", "andhadhun",
];
const CINEMAS: &[&str] = &["pvr", "inox", "cinepolis", "carnival", "miraj", "maxus"];
const WORK_TYPES: &[&str] = &["song", "album", "tv show", "game", "book", "picture", "soundtrack"];
const RATINGS: &[&str] = &["1", "2", "3", "4", "5", "do", "teen", "chaar", "paanch"];
const PARTY: &[&str] = &["2", "3", "4", "5", "6", "do", "teen", "chaar", "10"];
const FILLERS: &[&str] = &["yaar", "please", "bhai", "jaldi", "na", "plz", "zara", "abhi"];

/// Seeded spelling variants of romanized-Hindi words.
const VARIANTS: &[(&str, &[&str])] = &[
    ("kya", &["kya", "kia", "kyaa"]),
    ("mein", &["mein", "me", "mai", "mei"]),
    ("hai", &["hai", "h", "he", "hain"]),
    ("karo", &["karo", "kro", "karoo"]),
    ("kar", &["kar", "kr"]),
    ("mujhe", &["mujhe", "muje", "mujhey"]),
    ("batao", &["batao", "btao", "bataao"]),
    ("kaisa", &["kaisa", "kesa", "kaise"]),
    ("rahega", &["rahega", "rhega", "rahegaa"]),
    ("baarish", &["baarish", "barish", "baarsh"]),
    ("gaana", &["gaana", "gana", "gaane"]),
    ("bajao", &["bajao", "bajaao", "chalao"]),
    ("dhoondo", &["dhoondo", "dhundo", "dhoondho"]),
    ("dikhao", &["dikhao", "dikhaao", "dikha"]),
    ("chahiye", &["chahiye", "chaiye", "chahie"]),
    ("logon", &["logon", "logo", "log"]),
    ("liye", &["liye", "liya", "lie"]),
    ("mausam", &["mausam", "mosam", "mausum"]),
    ("naam", &["naam", "nam"]),
    ("wala", &["wala", "vala", "waala"]),
    ("kaunsi", &["kaunsi", "konsi", "kaun si"]),
    ("sunao", &["sunao", "sunaao", "suna"]),
    ("daal", &["daal", "dal", "dalo"]),
    ("meri", &["meri", "mri", "mere"]),
];

struct Template {
    intent: &'static str,
    pattern: &'static str,
}

const TEMPLATES: &[Template] = &[
    // PlayMusic
    Template { intent: "PlayMusic", pattern: "{artist} ka gaana bajao" },
    Template { intent: "PlayMusic", pattern: "mujhe {artist} ke songs sunao" },
    Template { intent: "PlayMusic", pattern: "play {song} by {artist}" },
    Template { intent: "PlayMusic", pattern: "{genre} music bajao na" },
    Template { intent: "PlayMusic", pattern: "{service} pe {artist} ka latest album play karo" },
    Template { intent: "PlayMusic", pattern: "{song} gaana chalao {service} pe" },
    Template { intent: "PlayMusic", pattern: "kuch {genre} sunao {artist} wala" },
    // AddToPlaylist
    Template { intent: "AddToPlaylist", pattern: "{song} ko meri {playlist} playlist mein add karo" },
    Template { intent: "AddToPlaylist", pattern: "{artist} ka ye gaana {playlist} mein daal do" },
    Template { intent: "AddToPlaylist", pattern: "add {song} to {playlist} playlist" },
    Template { intent: "AddToPlaylist", pattern: "meri {playlist} list mein {artist} ko add kar do" },
    Template { intent: "AddToPlaylist", pattern: "{song} by {artist} ko {playlist} collection mein save karo" },
    Template { intent: "AddToPlaylist", pattern: "is track ko {playlist} mein daal do" },
    // GetWeather
    Template { intent: "GetWeather", pattern: "{city} mein {time} mausam kaisa rahega" },
    Template { intent: "GetWeather", pattern: "kya {time} {city} mein baarish hogi" },
    Template { intent: "GetWeather", pattern: "{time} ka weather batao {city} ka" },
    Template { intent: "GetWeather", pattern: "{city} ka temperature kya hai {time}" },
    Template { intent: "GetWeather", pattern: "{time} {city} mein dhoop hogi ya thand" },
    Template { intent: "GetWeather", pattern: "weather forecast for {city} {time}" },
    // BookRestaurant
    Template { intent: "BookRestaurant", pattern: "{city} mein {party} logon ke liye {cuisine} restaurant book karo" },
    Template { intent: "BookRestaurant", pattern: "{restaurant} mein {time} ke liye table book kar do" },
    Template { intent: "BookRestaurant", pattern: "mujhe {party} logon ke liye {restaurant} mein reservation chahiye" },
    Template { intent: "BookRestaurant", pattern: "book a table at {restaurant} for {party} {time}" },
    Template { intent: "BookRestaurant", pattern: "{time} dinner ke liye koi {cuisine} jagah reserve karo {city} mein" },
    Template { intent: "BookRestaurant", pattern: "{restaurant} {city} mein seat book karni hai" },
    // RateBook
    Template { intent: "RateBook", pattern: "{book} ko {rating} out of {rating} stars do" },
    Template { intent: "RateBook", pattern: "is book {book} ko {rating} rating de do" },
    Template { intent: "RateBook", pattern: "{book} novel ko {rating} points dena hai" },
    Template { intent: "RateBook", pattern: "give the novel {book} a {rating} out of {rating}" },
    Template { intent: "RateBook", pattern: "meri taraf se {book} ko {rating} stars" },
    Template { intent: "RateBook", pattern: "rate {book} {rating} stars yaar" },
    // SearchCreativeWork
    Template { intent: "SearchCreativeWork", pattern: "{book} naam ka {work} dhoondo" },
    Template { intent: "SearchCreativeWork", pattern: "mujhe {movie} {work} dikhao" },
    Template { intent: "SearchCreativeWork", pattern: "kya tum {song} {work} search kar sakte ho" },
    Template { intent: "SearchCreativeWork", pattern: "find the {work} called {book}" },
    Template { intent: "SearchCreativeWork", pattern: "{movie} wala {work} kahan milega" },
    Template { intent: "SearchCreativeWork", pattern: "{song} naam ka {work} dhoondo" },
    // SearchScreeningEvent
    Template { intent: "SearchScreeningEvent", pattern: "{movie} {cinema} mein kab lag rahi hai" },
    Template { intent: "SearchScreeningEvent", pattern: "{time} {city} mein kaunsi movies chal rahi hai" },
    Template { intent: "SearchScreeningEvent", pattern: "{movie} ke show timings batao {cinema} ke" },
    Template { intent: "SearchScreeningEvent", pattern: "{cinema} {city} mein {time} ka schedule dikhao" },
    Template { intent: "SearchScreeningEvent", pattern: "show me movie times for {movie} {time}" },
    Template { intent: "SearchScreeningEvent", pattern: "{movie} ki tickets {time} ke liye kab available hai" },
];

fn slot_pool(name: &str) -> &'static [&'static str] {
    match name {
        "artist" => ARTISTS,
        "song" => SONGS,
        "playlist" => PLAYLISTS,
        "genre" => GENRES,
        "service" => SERVICES,
        "city" => CITIES,
        "time" => TIMES,
        "cuisine" => CUISINES,
        "restaurant" => RESTAURANTS,
        "book" => BOOKS,
        "movie" => MOVIES,
        "cinema" => CINEMAS,
        "work" => WORK_TYPES,
        "rating" => RATINGS,
        "party" => PARTY,
        other => panic!("unknown slot {other}"),
    }
}

fn fill(pattern: &str, rng: &mut RngStream) -> String {
    let mut out = String::with_capacity(pattern.len() + 16);
    let mut rest = pattern;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let close = rest[open..].find('}').expect("balanced template") + open;
        out.push_str(rng.choose(slot_pool(&rest[open + 1..close])));
        rest = &rest[close + 1..];
    }
    out.push_str(rest);
    out
}

fn perturb(text: &str, rng: &mut RngStream) -> String {
    let mut words: Vec<String> = text
        .split(' ')
        .map(|w| match VARIANTS.iter().find(|(k, _)| *k == w) {
            Some((_, forms)) if rng.bernoulli(0.5) => rng.choose(forms).to_string(),
            _ => w.to_string(),
        })
        .collect();
    if rng.bernoulli(0.2) {
        let f = rng.choose(FILLERS).to_string();
        if rng.bernoulli(0.5) {
            words.insert(0, f);
        } else {
            words.push(f);
        }
    }
    let mut s = words.join(" ");
    match rng.below(10) {
        0 => s = s.to_uppercase(),
        1..=3 => {
            let mut chars = s.chars();
            if let Some(first) = chars.next() {
                s = first.to_uppercase().chain(chars).collect();
            }
        }
        _ => {}
    }
    match rng.below(8) {
        0 => s.push('?'),
        1 => s.push_str("!!"),
        2 => s.push_str("..."),
        _ => {}
    }
    s
}

/// Generates `n_per_intent` utterances for each of the seven intents.
/// Deterministic under `seed`; record order is shuffled.
pub fn generate_codemix(seed: u64, n_per_intent: usize) -> LabeledDataset {
    let mut rng = RngStream::new(seed);
    let mut records = Vec::with_capacity(n_per_intent * INTENTS.len());
    for intent in INTENTS {
        let templates: Vec<&Template> = TEMPLATES.iter().filter(|t| t.intent == intent).collect();
        for _ in 0..n_per_intent {
            let t = rng.choose(&templates);
            let text = perturb(&fill(t.pattern, &mut rng), &mut rng);
            records.push(Record {
                utterance: Utterance::new(text),
                label: intent.to_string(),
            });
        }
    }
    rng.shuffle(&mut records);
    LabeledDataset::new(records)
}
