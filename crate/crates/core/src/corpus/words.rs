//! Word lists for synthetic records and filler text.

pub const FIRST_NAMES: &[&str] = &[
    "Anna", "Jan", "Lena", "Felix", "Sophie", "Lukas", "Marie", "Jonas", "Laura", "Tobias",
    "Katharina", "Stefan", "Julia", "Matthias", "Sabine", "Andreas", "Claudia", "Michael", "Petra",
    "Thomas", "Miriam", "Florian", "Johanna", "Sebastian", "Ute", "Jürgen", "Birgit", "Kai",
    "Heike", "Dominik", "Ingrid", "Malte", "Nadine", "Henrik", "Svenja", "Ralf",
];

pub const LAST_NAMES: &[&str] = &[
    "Müller", "Schmidt", "Schneider", "Fischer", "Weber", "Meyer", "Wagner", "Becker", "Schulz",
    "Hoffmann", "Koch", "Richter", "Klein", "Wolf", "Schröder", "Neumann", "Schwarz", "Zimmermann",
    "Braun", "Krüger", "Hofmann", "Hartmann", "Lange", "Schmitt", "Werner", "Krause", "Meier",
    "Lehmann", "Köhler", "Roth", "Vogel", "Jäger", "Brandt", "Haas", "Sommer", "Kühn",
];

/// (city, postcode, mail domain)
pub const CITIES: &[(&str, &str, &str)] = &[
    ("Köln", "50931", "uni-koeln.de"),
    ("Berlin", "10117", "hu-berlin.de"),
    ("München", "80539", "lmu.de"),
    ("Hamburg", "20146", "uni-hamburg.de"),
    ("Koblenz", "56070", "uni-koblenz.de"),
    ("Mannheim", "68159", "uni-mannheim.de"),
    ("Leipzig", "04109", "uni-leipzig.de"),
    ("Bielefeld", "33615", "uni-bielefeld.de"),
    ("Frankfurt am Main", "60323", "uni-frankfurt.de"),
    ("Mainz", "55128", "uni-mainz.de"),
    ("Bremen", "28359", "uni-bremen.de"),
    ("Göttingen", "37073", "uni-goettingen.de"),
    ("Konstanz", "78464", "uni-konstanz.de"),
    ("Bonn", "53113", "uni-bonn.de"),
    ("Tübingen", "72074", "uni-tuebingen.de"),
];

pub const STREETS: &[&str] = &[
    "Universitätsstraße", "Albertus-Magnus-Platz", "Unter den Linden", "Geschwister-Scholl-Platz",
    "Von-Melle-Park", "Schloss", "Augustusplatz", "Universitätsring", "Bismarckstraße",
    "Am Hubland", "Wilhelmstraße", "Regina-Pacis-Weg",
];

pub const SUBJECTS: &[&str] = &[
    "Soziologie", "Politikwissenschaft", "Medienwissenschaft", "Erziehungswissenschaft",
    "Psychologie", "Informatik", "Geschichte", "Kommunikationswissenschaft", "Ökonomie",
    "Kulturwissenschaften", "Sozialpolitik", "Geographie",
];

pub const INSTITUTES: &[&str] = &[
    "GESIS – Leibniz-Institut für Sozialwissenschaften",
    "Wissenschaftszentrum Berlin für Sozialforschung",
    "Deutsches Institut für Wirtschaftsforschung",
    "Max-Planck-Institut für Gesellschaftsforschung",
    "Leibniz-Institut für Bildungsverläufe",
];

pub const JOURNALS: &[&str] = &[
    "Zeitschrift für Soziologie",
    "Kölner Zeitschrift für Soziologie und Sozialpsychologie",
    "Politische Vierteljahresschrift",
    "Medien & Kommunikationswissenschaft",
    "Zeitschrift für Erziehungswissenschaft",
    "Soziale Welt",
    "Berliner Journal für Soziologie",
    "Historische Sozialforschung",
    "Zeitschrift für Medienwissenschaft",
    "Leviathan",
    "Psychologische Rundschau",
    "Sozialer Fortschritt",
    "Journal für Psychologie",
];

pub const MONTHS: &[&str] = &[
    "Januar", "Februar", "März", "April", "Mai", "Juni", "Juli", "August", "September", "Oktober",
    "November", "Dezember",
];

pub const DOI_PREFIXES: &[&str] = &["10.1515", "10.1007", "10.17645", "10.3224", "10.5771", "10.12759"];

pub const DOI_SLUGS: &[&str] = &["zfsoz", "kzfss", "pvs", "mk", "zfe", "soz", "hsr", "zfm", "lev"];

pub const TITLE_ADJECTIVES: &[&str] = &[
    "Soziale", "Digitale", "Politische", "Regionale", "Kulturelle", "Berufliche", "Institutionelle",
    "Neue", "Gesellschaftliche", "Transnationale", "Ökonomische", "Mediale",
];

pub const TITLE_NOUNS: &[&str] = &[
    "Ungleichheit", "Digitalisierung", "Mediennutzung", "Bildungsaufstiege", "Migration",
    "Erwerbsarbeit", "Partizipation", "Identität", "Öffentlichkeit", "Vertrauen", "Mobilität",
    "Solidarität", "Sozialkapital", "Nachhaltigkeit", "Polarisierung", "Anerkennung",
];

pub const TITLE_CONTEXTS: &[&str] = &[
    "im Wandel", "in Deutschland", "in Europa", "nach der Wiedervereinigung", "im ländlichen Raum",
    "in der Spätmoderne", "zwischen Markt und Staat", "im Lebensverlauf", "in der Krise",
];

pub const TITLE_SUBTITLES: &[&str] = &[
    "Eine empirische Analyse",
    "Befunde aus einer Längsschnittstudie",
    "Theoretische Überlegungen und empirische Befunde",
    "Ein Vergleich von zwölf Ländern",
    "Eine qualitative Fallstudie",
    "Ergebnisse einer Panelbefragung",
    "Zur Kritik eines Konzepts",
];

pub const ABSTRACT_OPENERS: &[&str] = &[
    "Der Beitrag untersucht",
    "Dieser Artikel analysiert",
    "Die vorliegende Studie fragt nach",
    "Im Mittelpunkt des Beitrags steht",
    "Wir diskutieren",
];

pub const ABSTRACT_DATA: &[&str] = &[
    "Daten des Sozio-oekonomischen Panels",
    "einer standardisierten Befragung",
    "qualitativen Interviews",
    "einer Inhaltsanalyse von Zeitungsartikeln",
    "administrativen Daten",
    "einer repräsentativen Stichprobe",
];

pub const ABSTRACT_FINDINGS: &[&str] = &[
    "die Effekte deutlich schwächer ausfallen als bisher angenommen",
    "strukturelle Faktoren eine zentrale Rolle spielen",
    "sich erhebliche Unterschiede zwischen den Gruppen zeigen",
    "die Befunde frühere Studien nur teilweise bestätigen",
    "institutionelle Rahmenbedingungen den Zusammenhang moderieren",
    "der Wandel vor allem jüngere Kohorten betrifft",
];

pub const ABSTRACT_CLOSERS: &[&str] = &[
    "Abschließend werden Implikationen für Forschung und Praxis diskutiert.",
    "Die Ergebnisse werden im Lichte aktueller Debatten eingeordnet.",
    "Der Beitrag schließt mit einem Ausblick auf offene Forschungsfragen.",
    "Daraus ergeben sich Hinweise für die weitere theoretische Entwicklung.",
];

/// Function and content words for unclassified body text.
pub const FILLER: &[&str] = &[
    "die", "der", "und", "in", "den", "von", "zu", "das", "mit", "sich", "des", "auf", "für", "ist",
    "im", "dem", "nicht", "ein", "eine", "als", "auch", "es", "an", "werden", "aus", "er", "hat",
    "dass", "sie", "nach", "wird", "bei", "einer", "um", "am", "sind", "noch", "wie", "einem",
    "über", "einen", "so", "zum", "war", "haben", "nur", "oder", "aber", "vor", "zur", "bis",
    "mehr", "durch", "man", "sein", "wurde", "sei", "Forschung", "Gesellschaft", "Analyse",
    "Perspektive", "Entwicklung", "Frage", "Bedeutung", "Studie", "Ansatz", "Diskussion",
    "Untersuchung", "Beispiel", "Kontext", "Rahmen", "Theorie", "Praxis", "Prozess", "Struktur",
    "Gruppe", "Wandel", "Ergebnis", "Daten", "Befund", "Literatur", "Konzept", "Debatte",
    "Zusammenhang", "Kapitel", "Abschnitt", "Modell", "zentral", "wichtig", "bisher", "zudem",
    "jedoch", "insbesondere", "zunächst", "bereits", "vielmehr", "schließlich", "empirisch",
    "theoretisch", "sozial", "politisch", "deutlich", "häufig", "wesentlich",
];
