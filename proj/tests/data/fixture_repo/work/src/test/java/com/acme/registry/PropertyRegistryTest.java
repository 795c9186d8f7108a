package com.acme.registry;

import org.junit.Test;
import static org.junit.Assert.assertEquals;

public class PropertyRegistryTest {

    private final PropertyRegistry propertyRegister = new PropertyRegistry();

    @Test
    public void testSetMissingPropertyTypeFromStringValue() {
        assertEquals(
            "http://www.wikidata.org/ontology#propertyTypeString",
            this.propertyRegister.setPropertyTypeFromStringValue(
                "P10", "http://musicbrainz.org/$1/artist"));
    }

    @Test
    public void testSave() {
        this.propertyRegister.saveAll(new String[] {"P10"});
        assertEquals("P10", this.propertyRegister.save("P10"));
    }
}
